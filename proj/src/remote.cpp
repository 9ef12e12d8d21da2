#include "flowforge/remote.hpp"

#include "flowforge/error.hpp"
#include "flowforge/json_io.hpp"
#include "flowforge/n8n.hpp"

#include <httplib.h>

#include <algorithm>

namespace flowforge {

using json = nlohmann::json;

namespace {

std::ptrdiff_t slot_count(std::size_t n) {
  return static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(n, 1, 1024));
}

} // namespace

RemoteClient::RemoteClient(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)), slots_(slot_count(endpoint_.max_inflight)) {
  const std::string &url = endpoint_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(ErrorCode::InvalidArgument, "unsupported endpoint scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  if (path_start != std::string::npos)
    prefix_ = url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/')
    prefix_.pop_back();
  if (origin_.size() <= scheme_end + 3)
    throw Error(ErrorCode::InvalidArgument, "endpoint has no host: " + url);
}

json RemoteClient::post(const std::string &op, const json &body) const {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<> &s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(endpoint_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  if (!endpoint_.api_key.empty())
    client.set_bearer_token_auth(endpoint_.api_key);

  const std::string path = prefix_ + "/" + op;
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res)
    throw Error(ErrorCode::ProviderUnavailable,
                "POST " + path + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorCode::ProviderUnavailable,
                "POST " + path + " returned HTTP " + std::to_string(res->status));
  json out = json::parse(res->body, nullptr, false);
  if (out.is_discarded() || !out.is_object())
    throw Error(ErrorCode::ProviderUnavailable, "POST " + path + " returned a non-object body");
  return out;
}

std::vector<double> RemoteEmbeddingProvider::raw_embedding(std::string_view text) {
  const json out = client_->post("embed", json{{"text", text}});
  const auto it = out.find("embedding");
  if (it == out.end() || !it->is_array())
    throw Error(ErrorCode::ProviderUnavailable, "embedding response lacks an \"embedding\" array");
  std::vector<double> v;
  v.reserve(it->size());
  for (const auto &x : *it) {
    if (!x.is_number())
      throw Error(ErrorCode::ProviderUnavailable, "embedding holds a non-numeric value");
    v.push_back(x.get<double>());
  }
  return v;
}

Segment RemoteAnnotator::annotate(const Segment &segment) {
  json out;
  try {
    out = client_->post("annotate", json{{"segment", segment}});
  } catch (const Error &e) {
    throw Error(ErrorCode::AnnotatorUnavailable, e.detail());
  }
  const auto name = out.find("name");
  const auto description = out.find("description");
  if (name == out.end() || !name->is_string() || description == out.end() ||
      !description->is_string())
    throw Error(ErrorCode::AnnotatorUnavailable,
                "annotation response needs string \"name\" and \"description\"");
  Segment s = segment;
  s.description.segment_name = name->get<std::string>();
  s.description.segment_description = description->get<std::string>();
  return s;
}

std::vector<UnitDraft> RemoteAnalyzer::analyze(std::string_view requirement,
                                               const std::vector<ContextWorkflow> &context) {
  json ctx = json::array();
  for (const auto &c : context)
    ctx.push_back(
        {{"name", c.name}, {"description", c.description}, {"segment_titles", c.segment_titles}});
  const json out = client_->post("analyze", json{{"requirement", requirement}, {"context", ctx}});
  const auto units = out.find("units");
  if (units == out.end() || !units->is_array())
    throw Error(ErrorCode::AnalyzerViolation, "analysis response lacks a \"units\" array");
  std::vector<UnitDraft> drafts;
  for (const auto &u : *units) {
    if (!u.is_object() || !u.contains("description") || !u["description"].is_string())
      throw Error(ErrorCode::AnalyzerViolation, "unit without a string description");
    UnitDraft d;
    d.title = u.value("title", std::string{});
    d.description = u["description"].get<std::string>();
    if (u.contains("depends_on") && !u["depends_on"].is_null()) {
      try {
        d.depends_on = u["depends_on"].get<std::vector<std::size_t>>();
      } catch (const json::exception &) {
        throw Error(ErrorCode::AnalyzerViolation, "depends_on must list unit ids");
      }
    }
    drafts.push_back(std::move(d));
  }
  return drafts;
}

Segment RemoteGenerator::generate(const FunctionalUnit &unit) {
  json out;
  try {
    out = client_->post("generate", json{{"unit",
                                          {{"unit_id", unit.unit_id},
                                           {"title", unit.title},
                                           {"description", unit.description},
                                           {"depends_on", unit.depends_on}}}});
  } catch (const Error &e) {
    throw Error(ErrorCode::GeneratorUnavailable, e.detail());
  }
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  try {
    nodes = out.at("nodes").get<std::vector<NodeSpec>>();
    edges = out.value("edges", std::vector<EdgeSpec>{});
  } catch (const std::exception &e) {
    throw Error(ErrorCode::GeneratorUnavailable, std::string("malformed generated segment: ") + e.what());
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json &src = out["nodes"][i];
    if (!src.contains("inputs") && !src.contains("outputs")) {
      auto io = infer_node_io(nodes[i].ntype, nodes[i].role == NodeRole::Trigger);
      nodes[i].inputs = std::move(io.inputs);
      nodes[i].outputs = std::move(io.outputs);
    }
  }
  Segment s;
  s.graph = make_segment_graph(std::move(nodes), std::move(edges));
  s.description.segment_id = s.graph.segment_id;
  s.description.segment_name = out.value("name", unit.title);
  s.description.segment_description = out.value("description", unit.description);
  s.synthetic = true;
  return s;
}

} // namespace flowforge
