#include "flowforge/n8n.hpp"

#include "flowforge/error.hpp"
#include "flowforge/hash.hpp"
#include "flowforge/json_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace flowforge {

using nlohmann::json;

const std::set<std::string, std::less<>> &redundancy_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "position", "color", "notes", "notesInFlow", "disabled",
      "webhookId", "pinData", "meta", "tags", "settings"};
  return keys;
}

DocFormat format_from_filename(std::string_view filename) {
  std::string ext = std::filesystem::path(filename).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".json")
    return DocFormat::Json;
  if (ext == ".yml" || ext == ".yaml")
    return DocFormat::Yaml;
  throw Error(ErrorCode::UnsupportedFormat,
              "cannot infer document format from '" + std::string(filename) + "'");
}

SourceDocument SourceDocument::from_bytes(std::string filename, std::string bytes) {
  const DocFormat fmt = format_from_filename(filename);
  return SourceDocument{std::move(filename), fmt, std::move(bytes)};
}

SourceDocument SourceDocument::from_file(const std::filesystem::path &path) {
  const DocFormat fmt = format_from_filename(path.filename().string());
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::MalformedDocument, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return SourceDocument{path.filename().string(), fmt, buf.str()};
}

// ---------------------------------------------------------------------------
// YAML front-end
// ---------------------------------------------------------------------------

namespace {

json yaml_scalar(const YAML::Node &node) {
  const std::string &s = node.Scalar();
  // Quoted scalars carry the non-specific "!" tag and always stay strings.
  if (node.Tag() == "!")
    return s;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL")
    return nullptr;
  if (s == "true" || s == "True" || s == "TRUE")
    return true;
  if (s == "false" || s == "False" || s == "FALSE")
    return false;
  std::int64_t iv = 0;
  if (auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
      ec == std::errc{} && ptr == s.data() + s.size())
    return iv;
  double dv = 0;
  if (auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), dv);
      ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(dv))
    return dv;
  return s;
}

json yaml_to_json(const YAML::Node &node) {
  switch (node.Type()) {
  case YAML::NodeType::Null:
  case YAML::NodeType::Undefined:
    return nullptr;
  case YAML::NodeType::Scalar:
    return yaml_scalar(node);
  case YAML::NodeType::Sequence: {
    json arr = json::array();
    for (const auto &item : node)
      arr.push_back(yaml_to_json(item));
    return arr;
  }
  case YAML::NodeType::Map: {
    json obj = json::object();
    for (const auto &kv : node)
      obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
    return obj;
  }
  }
  return nullptr;
}

} // namespace

json decode_document(const SourceDocument &doc) {
  try {
    if (doc.format == DocFormat::Json)
      return json::parse(doc.bytes);
    return yaml_to_json(YAML::Load(doc.bytes));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedDocument, doc.filename + ": " + e.what());
  } catch (const YAML::Exception &e) {
    throw Error(ErrorCode::MalformedDocument, doc.filename + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

std::string workflow_content_id(const WorkflowGraph &g) {
  json canonical = g;
  canonical.erase("workflow_id");
  return content_id(canonical.dump());
}

namespace {

std::size_t port_value(const json &v, const std::string &where) {
  if (v.is_number_unsigned())
    return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::size_t>(v.get<std::int64_t>());
  throw Error(ErrorCode::MalformedDocument, "invalid port index in " + where);
}

} // namespace

ParseResult parse_n8n(const SourceDocument &doc) {
  const json root = decode_document(doc);
  if (!root.is_object())
    throw Error(ErrorCode::MalformedDocument, doc.filename + ": root is not an object");
  const auto nodes_it = root.find("nodes");
  if (nodes_it == root.end() || !nodes_it->is_array())
    throw Error(ErrorCode::MalformedDocument, doc.filename + ": missing \"nodes\" array");

  ParseResult out;
  WorkflowGraph &g = out.graph;
  if (auto it = root.find("name"); it != root.end() && it->is_string())
    g.name = it->get<std::string>();
  if (auto it = root.find("description"); it != root.end() && it->is_string())
    g.description = it->get<std::string>();
  for (const auto &[key, value] : root.items()) {
    if (redundancy_keys().contains(key))
      out.strip.removed_keys.push_back({"", key});
  }

  std::unordered_map<std::string, NodeId> id_by_name;
  std::unordered_set<NodeId> ids;
  for (const auto &raw : *nodes_it) {
    if (!raw.is_object() || !raw.contains("name") || !raw["name"].is_string() ||
        !raw.contains("type") || !raw["type"].is_string())
      throw Error(ErrorCode::MalformedDocument,
                  doc.filename + ": node without string \"name\" and \"type\"");
    NodeSpec n;
    n.name = raw["name"].get<std::string>();
    n.ntype = raw["type"].get<std::string>();
    n.node_id = (raw.contains("id") && raw["id"].is_string() &&
                 !raw["id"].get<std::string>().empty())
                    ? raw["id"].get<std::string>()
                    : n.name;
    if (!id_by_name.emplace(n.name, n.node_id).second)
      throw Error(ErrorCode::MalformedDocument, doc.filename + ": duplicate node name '" +
                                                    n.name + "'");
    if (!ids.insert(n.node_id).second)
      throw Error(ErrorCode::MalformedDocument,
                  doc.filename + ": duplicate node id '" + n.node_id + "'");

    if (n.ntype == kConnectorType)
      n.role = NodeRole::Connector;
    else if (is_trigger_type(n.ntype))
      n.role = NodeRole::Trigger;
    else
      n.role = NodeRole::Function;
    auto io = infer_node_io(n.ntype, n.role == NodeRole::Trigger);
    n.inputs = std::move(io.inputs);
    n.outputs = std::move(io.outputs);

    for (const auto &[key, value] : raw.items()) {
      if (key == "id" || key == "name" || key == "type")
        continue;
      if (key == "credentials") {
        out.warnings.push_back("node '" + n.name + "': credentials dropped");
        continue;
      }
      if (redundancy_keys().contains(key)) {
        out.strip.removed_keys.push_back({n.node_id, key});
        if (key == "position" && value.is_array() && value.size() == 2 &&
            value[0].is_number() && value[1].is_number())
          out.positions[n.node_id] = {value[0].get<double>(), value[1].get<double>()};
        continue;
      }
      n.raw_config[key] = value;
    }
    g.nodes.push_back(std::move(n));
  }

  if (auto conns = root.find("connections"); conns != root.end() && !conns->is_null()) {
    if (!conns->is_object())
      throw Error(ErrorCode::MalformedDocument, doc.filename + ": \"connections\" is not an object");
    std::set<EdgeSpec> seen;
    for (const auto &[source_name, by_type] : conns->items()) {
      auto src = id_by_name.find(source_name);
      if (src == id_by_name.end())
        throw Error(ErrorCode::DanglingConnection,
                    "connection from unknown node '" + source_name + "'");
      if (!by_type.is_object())
        throw Error(ErrorCode::MalformedDocument, "connections of '" + source_name + "'");
      for (const auto &[ctype, ports] : by_type.items()) {
        if (ctype != "main") {
          out.warnings.push_back("node '" + source_name + "': connection type '" + ctype +
                                 "' ignored");
          continue;
        }
        if (ports.is_null())
          continue;
        if (!ports.is_array())
          throw Error(ErrorCode::MalformedDocument, "connections of '" + source_name + "'");
        for (std::size_t port = 0; port < ports.size(); ++port) {
          const json &targets = ports[port];
          if (targets.is_null())
            continue;
          if (!targets.is_array())
            throw Error(ErrorCode::MalformedDocument, "connections of '" + source_name + "'");
          for (const auto &t : targets) {
            if (!t.is_object() || !t.contains("node") || !t["node"].is_string())
              throw Error(ErrorCode::MalformedDocument,
                          "connection entry of '" + source_name + "'");
            const std::string target_name = t["node"].get<std::string>();
            auto tgt = id_by_name.find(target_name);
            if (tgt == id_by_name.end())
              throw Error(ErrorCode::DanglingConnection,
                          "connection from '" + source_name + "' to unknown node '" +
                              target_name + "'");
            EdgeSpec e{src->second, port, tgt->second,
                       t.contains("index") ? port_value(t["index"], source_name) : 0};
            if (!seen.insert(e).second) {
              out.warnings.push_back("duplicate connection '" + source_name + "' -> '" +
                                     target_name + "' dropped");
              continue;
            }
            g.edges.push_back(std::move(e));
          }
        }
      }
    }
  }

  g.workflow_id = workflow_content_id(g);
  return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json coordinate(double v) {
  if (std::nearbyint(v) == v && std::abs(v) < 1e15)
    return static_cast<std::int64_t>(v);
  return v;
}

std::string file_stem(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c))
      out.push_back(static_cast<char>(std::tolower(c)));
    else if (!out.empty() && out.back() != '_')
      out.push_back('_');
  }
  while (!out.empty() && out.back() == '_')
    out.pop_back();
  return out.empty() ? "workflow" : out;
}

} // namespace

nlohmann::ordered_json emit_n8n_object(const WorkflowGraph &g, const Positions &positions) {
  using ojson = nlohmann::ordered_json;
  if (const auto report = validate_graph(g); !report.ok())
    throw Error(ErrorCode::InvalidGraph, std::string(to_string(report.violations[0].kind)) +
                                             " " + report.violations[0].subject);
  std::unordered_map<NodeId, const NodeSpec *> by_id;
  std::unordered_set<std::string> names;
  for (const auto &n : g.nodes) {
    by_id.emplace(n.node_id, &n);
    if (!names.insert(n.name).second)
      throw Error(ErrorCode::DuplicateNodeName,
                  "n8n connections key by name; '" + n.name + "' is not unique");
    if (!positions.contains(n.node_id))
      throw Error(ErrorCode::MissingPosition, "node '" + n.node_id + "' has no position");
  }

  ojson doc = ojson::object();
  doc["name"] = g.name;
  if (!g.description.empty())
    doc["description"] = g.description;

  ojson nodes = ojson::array();
  for (const auto &n : g.nodes) {
    ojson node = ojson::object();
    node["id"] = n.node_id;
    node["name"] = n.name;
    node["type"] = n.ntype;
    node["typeVersion"] = n.raw_config.contains("typeVersion")
                              ? ojson(n.raw_config["typeVersion"])
                              : ojson(1);
    const Position &pos = positions.at(n.node_id);
    node["position"] = ojson::array({coordinate(pos.x), coordinate(pos.y)});
    node["parameters"] = n.raw_config.contains("parameters") ? ojson(n.raw_config["parameters"])
                                                              : ojson::object();
    for (const auto &[key, value] : n.raw_config.items()) {
      if (key != "typeVersion" && key != "parameters")
        node[key] = ojson(value);
    }
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);

  ojson connections = ojson::object();
  for (const auto &n : g.nodes) {
    std::vector<const EdgeSpec *> outgoing;
    for (const auto &e : g.edges) {
      if (e.source == n.node_id)
        outgoing.push_back(&e);
    }
    if (outgoing.empty())
      continue;
    std::size_t max_port = 0;
    for (const auto *e : outgoing)
      max_port = std::max(max_port, e->source_port);
    ojson main = ojson::array();
    for (std::size_t port = 0; port <= max_port; ++port) {
      ojson targets = ojson::array();
      for (const auto *e : outgoing) {
        if (e->source_port != port)
          continue;
        auto target = by_id.find(e->target);
        if (target == by_id.end())
          throw Error(ErrorCode::InvalidGraph, "edge to unknown node '" + e->target + "'");
        targets.push_back(
            {{"node", target->second->name}, {"type", "main"}, {"index", e->target_port}});
      }
      main.push_back(std::move(targets));
    }
    connections[n.name] = ojson{{"main", std::move(main)}};
  }
  doc["connections"] = std::move(connections);
  doc["active"] = false;
  doc["settings"] = ojson{{"executionOrder", "v1"}};
  return doc;
}

SourceDocument emit_n8n(const WorkflowGraph &g, const Positions &positions) {
  const auto doc = emit_n8n_object(g, positions);
  return SourceDocument{file_stem(g.name) + ".json", DocFormat::Json, doc.dump(2) + "\n"};
}

} // namespace flowforge
