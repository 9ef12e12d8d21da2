#include "flowforge/json_io.hpp"

#include "flowforge/error.hpp"

namespace flowforge {

using nlohmann::json;

void to_json(json &j, const ParamSpec &p) {
  j = json{{"name", p.name}, {"ptype", to_string(p.ptype)}, {"required", p.required}};
}

void from_json(const json &j, ParamSpec &p) {
  p.name = j.at("name").get<std::string>();
  const auto t = parse_param_type(j.value("ptype", "any"));
  if (!t)
    throw Error(ErrorCode::InvalidArgument, "unknown ptype in parameter " + p.name);
  p.ptype = *t;
  p.required = j.value("required", false);
}

void to_json(json &j, const NodeSpec &n) {
  j = json{{"node_id", n.node_id}, {"name", n.name},       {"ntype", n.ntype},
           {"role", to_string(n.role)}, {"inputs", n.inputs}, {"outputs", n.outputs},
           {"raw_config", n.raw_config}};
}

void from_json(const json &j, NodeSpec &n) {
  n.node_id = j.at("node_id").get<std::string>();
  n.name = j.value("name", n.node_id);
  n.ntype = j.at("ntype").get<std::string>();
  const auto r = parse_node_role(j.value("role", "function"));
  if (!r)
    throw Error(ErrorCode::InvalidArgument, "unknown role on node " + n.node_id);
  n.role = *r;
  n.inputs = j.value("inputs", std::vector<ParamSpec>{});
  n.outputs = j.value("outputs", std::vector<ParamSpec>{});
  n.raw_config = j.value("raw_config", json::object());
}

void to_json(json &j, const EdgeSpec &e) {
  j = json{{"source", e.source},
           {"source_port", e.source_port},
           {"target", e.target},
           {"target_port", e.target_port}};
}

void from_json(const json &j, EdgeSpec &e) {
  e.source = j.at("source").get<std::string>();
  e.source_port = j.value("source_port", std::size_t{0});
  e.target = j.at("target").get<std::string>();
  e.target_port = j.value("target_port", std::size_t{0});
}

void to_json(json &j, const WorkflowGraph &g) {
  j = json{{"workflow_id", g.workflow_id}, {"name", g.name},
           {"description", g.description}, {"nodes", g.nodes},
           {"edges", g.edges}};
}

void from_json(const json &j, WorkflowGraph &g) {
  g.workflow_id = j.value("workflow_id", "");
  g.name = j.value("name", "");
  g.description = j.value("description", "");
  g.nodes = j.value("nodes", std::vector<NodeSpec>{});
  g.edges = j.value("edges", std::vector<EdgeSpec>{});
}

void to_json(json &j, const Violation &v) {
  j = json{{"kind", to_string(v.kind)}, {"subject", v.subject}, {"detail", v.detail}};
}

} // namespace flowforge
