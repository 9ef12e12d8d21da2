#include "flowforge/service.hpp"

#include "flowforge/construction.hpp"
#include "flowforge/ingest.hpp"
#include "flowforge/json_io.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/platform.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

namespace flowforge {

using json = nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::NotFound:
    return 404;
  case ErrorCode::ProviderUnavailable:
  case ErrorCode::AnnotatorUnavailable:
  case ErrorCode::GeneratorUnavailable:
  case ErrorCode::AnnotatorViolation:
  case ErrorCode::AnalyzerViolation:
    return 502;
  case ErrorCode::StorageFailure:
  case ErrorCode::BindFailure:
    return 500;
  default:
    return 400;
  }
}

namespace {

void send_json(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, int status, std::string_view code,
                const std::string &message) {
  send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request &req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos)
    return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::MalformedDocument, "request body is not valid JSON");
  if (!j.is_object())
    throw Error(ErrorCode::MalformedDocument, "request body must be an object");
  return j;
}

bool flag(const httplib::Request &req, const std::string &name, bool fallback) {
  if (!req.has_param(name))
    return fallback;
  const std::string v = req.get_param_value(name);
  if (v == "true" || v == "1" || v.empty())
    return true;
  if (v == "false" || v == "0")
    return false;
  throw Error(ErrorCode::InvalidArgument, name + " must be true or false");
}

template <typename T> T field(const json &j, const char *key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::InvalidArgument, std::string("field \"") + key + "\" is missing or mistyped");
  }
}

SourceDocument upload_document(const httplib::Request &req) {
  if (req.is_multipart_form_data()) {
    if (!req.has_file("file"))
      throw Error(ErrorCode::InvalidArgument, "multipart upload needs a \"file\" part");
    const auto part = req.get_file_value("file");
    const std::string name = part.filename.empty()
                                 ? (req.has_param("filename") ? req.get_param_value("filename")
                                                              : std::string("upload.json"))
                                 : part.filename;
    return SourceDocument::from_bytes(name, part.content);
  }
  std::string name;
  if (req.has_param("filename")) {
    name = req.get_param_value("filename");
  } else {
    const std::string type = req.get_header_value("Content-Type");
    if (type.find("yaml") != std::string::npos)
      name = "upload.yaml";
    else if (type.empty() || type.find("json") != std::string::npos)
      name = "upload.json";
    else
      throw Error(ErrorCode::UnsupportedFormat, "cannot infer document format from " + type);
  }
  return SourceDocument::from_bytes(name, req.body);
}

json workflow_json(const WorkflowRecord &r) {
  json j = r.graph;
  j["segment_ids"] = r.segment_ids;
  return j;
}

json workflow_summary(const WorkflowRecord &r) {
  return json{{"workflow_id", r.graph.workflow_id}, {"name", r.graph.name},
              {"description", r.graph.description}, {"node_count", r.graph.nodes.size()},
              {"edge_count", r.graph.edges.size()},    {"segment_ids", r.segment_ids}};
}

json segment_summary(const Segment &s) {
  return json{{"segment_id", s.graph.segment_id},
              {"name", s.description.segment_name},
              {"description", s.description.segment_description},
              {"source_workflow", s.description.source_workflow.id},
              {"node_count", s.graph.nodes.size()},
              {"synthetic", s.synthetic}};
}

// Graph edits take nodes and edges only; boundaries and the id are derived.
SegmentGraph segment_graph_from(const json &g) {
  if (!g.is_object())
    throw Error(ErrorCode::InvalidSegment, "graph must be an object");
  try {
    auto nodes = g.at("nodes").get<std::vector<NodeSpec>>();
    const char *edge_key = g.contains("edges") ? "edges" : "internal_edges";
    auto edges = g.value(edge_key, std::vector<EdgeSpec>{});
    return make_segment_graph(std::move(nodes), std::move(edges));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::InvalidSegment, std::string("malformed segment graph: ") + e.what());
  }
}

Segment segment_from_body(const json &body, Segment base) {
  if (body.contains("graph"))
    base.graph = segment_graph_from(body["graph"]);
  base.description.segment_id = base.graph.segment_id;
  if (body.contains("name"))
    base.description.segment_name = field<std::string>(body, "name");
  if (body.contains("description"))
    base.description.segment_description = field<std::string>(body, "description");
  if (body.contains("synthetic"))
    base.synthetic = field<bool>(body, "synthetic");
  if (body.contains("source_workflow")) {
    const json &src = body["source_workflow"];
    if (src.is_object()) {
      base.description.source_workflow.id = src.value("id", "");
      base.description.source_workflow.name = src.value("name", "");
      base.description.source_workflow.description = src.value("description", "");
    }
  }
  return base;
}

} // namespace

struct Service::Impl {
  Engine &engine;
  httplib::Server server;
  bool bound{false};

  explicit Impl(Engine &e) : engine(e) { routes(); }

  template <typename Fn> httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request &req, httplib::Response &res) {
      try {
        fn(req, res);
      } catch (const Error &e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.detail());
      } catch (const std::exception &e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  }

  void routes() {
    Repository &repo = *engine.repository;

    server.Get("/health", guarded([&repo](const auto &, auto &res) {
                 send_json(res, 200, json{{"status", "ok"}, {"segment_count", repo.stats().segment_count}});
               }));

    server.Post("/workflows", guarded([this, &repo](const auto &req, auto &res) {
                  const SourceDocument doc = upload_document(req);
                  const IngestOutcome out =
                      ingest_document(repo, doc, *engine.annotator, engine.config.max_inflight_llm,
                                      flag(req, "extract", true));
                  send_json(res, out.already_present ? 200 : 201,
                            json{{"workflow_id", out.workflow_id},
                                 {"status", out.already_present ? "already_present" : "created"},
                                 {"segment_ids", out.segment_ids},
                                 {"warnings", out.warnings}});
                }));

    server.Get("/workflows", guarded([&repo](const auto &, auto &res) {
                 json list = json::array();
                 for (const auto &r : repo.list_workflows())
                   list.push_back(workflow_summary(r));
                 send_json(res, 200, json{{"workflows", list}});
               }));

    server.Get(R"(/workflows/([^/]+))", guarded([&repo](const auto &req, auto &res) {
                 send_json(res, 200, workflow_json(repo.fetch_workflow(req.matches[1])));
               }));

    server.Post(R"(/workflows/([^/]+)/decompose)",
                guarded([this, &repo](const auto &req, auto &res) {
                  const WorkflowRecord r = repo.fetch_workflow(req.matches[1]);
                  const Decomposition d = annotate(decompose_structural(r.graph), *engine.annotator,
                                                   engine.config.max_inflight_llm);
                  send_json(res, 200,
                            json{{"decomposition", d},
                                 {"report", validate_decomposition(r.graph, d)}});
                }));

    server.Get("/segments", guarded([&repo](const auto &, auto &res) {
                 json list = json::array();
                 for (const auto &s : repo.list_segments())
                   list.push_back(segment_summary(s));
                 send_json(res, 200, json{{"segments", list}});
               }));

    server.Get(R"(/segments/([^/]+))", guarded([&repo](const auto &req, auto &res) {
                 send_json(res, 200, json(repo.fetch_segment(req.matches[1])));
               }));

    server.Put(R"(/segments/([^/]+))", guarded([&repo](const auto &req, auto &res) {
                 const std::string old_id = req.matches[1];
                 const json body = parse_body(req);
                 const Segment edited = segment_from_body(body, repo.fetch_segment(old_id));
                 validate_segment(edited);
                 const std::string new_id = edited.graph.segment_id;
                 json out{{"segment_id", new_id},
                          {"previous_id", old_id},
                          {"reminted", new_id != old_id},
                          {"segment", edited}};
                 if (flag(req, "validate_only", false)) {
                   out["valid"] = true;
                   send_json(res, 200, out);
                   return;
                 }
                 repo.store_segment(edited);
                 if (new_id != old_id)
                   repo.delete_segment(old_id);
                 send_json(res, 200, out);
               }));

    server.Post("/segments", guarded([&repo](const auto &req, auto &res) {
                  const json body = parse_body(req);
                  if (!body.contains("graph"))
                    throw Error(ErrorCode::InvalidSegment, "segment body needs a graph");
                  const Segment s = segment_from_body(body, Segment{});
                  validate_segment(s);
                  const bool existed = [&] {
                    try {
                      (void)repo.fetch_graph(s.graph.segment_id);
                      return true;
                    } catch (const Error &) {
                      return false;
                    }
                  }();
                  send_json(res, existed ? 200 : 201, json{{"segment_id", repo.store_segment(s)}});
                }));

    server.Post("/construct", guarded([this, &repo](const auto &req, auto &res) {
                  const json body = parse_body(req);
                  ConstructOptions opts = engine.construct_options();
                  if (body.contains("k"))
                    opts.retrieval.k = field<std::size_t>(body, "k");
                  if (body.contains("theta"))
                    opts.retrieval.theta = field<double>(body, "theta");
                  if (body.contains("platform"))
                    opts.platform = field<std::string>(body, "platform");
                  const std::string requirement =
                      body.contains("requirement") ? field<std::string>(body, "requirement") : "";
                  opts.retrieval.validate();
                  const ConstructionResult r =
                      construct(requirement, repo, opts, *engine.analyzer, *engine.generator);
                  send_json(res, 200, json(r));
                }));

    server.Post("/export", guarded([&repo](const auto &req, auto &res) {
                  const json body = parse_body(req);
                  const auto id = field<std::string>(body, "workflow_id");
                  const std::string platform =
                      body.contains("platform") ? field<std::string>(body, "platform") : "n8n";
                  const auto &adapter = adapter_for(platform);
                  const WorkflowRecord r = repo.fetch_workflow(id);
                  const AdaptedWorkflow adapted = adapt_platform(r.graph, adapter.platform());
                  res.set_header("Content-Disposition",
                                 "attachment; filename=\"" + adapted.document.filename + "\"");
                  res.status = 200;
                  res.set_content(adapted.document.bytes, "application/json");
                }));

    server.set_error_handler([](const httplib::Request &req, httplib::Response &res) {
      if (!res.body.empty())
        return;
      if (res.status == 404)
        send_error(res, 404, to_string(ErrorCode::NotFound), "no route for " + req.method + " " + req.path);
      else
        send_error(res, res.status, "HttpError", "HTTP " + std::to_string(res.status));
    });
  }
};

Service::Service(Engine &engine) : impl_(std::make_unique<Impl>(engine)) {}

Service::~Service() = default;

std::uint16_t Service::bind(const ListenAddress &addr) {
  int port = addr.port;
  if (addr.port == 0) {
    port = impl_->server.bind_to_any_port(addr.host);
  } else if (!impl_->server.bind_to_port(addr.host, addr.port)) {
    port = -1;
  }
  if (port <= 0)
    throw Error(ErrorCode::BindFailure,
                "cannot bind " + addr.host + ":" + std::to_string(addr.port));
  impl_->bound = true;
  return static_cast<std::uint16_t>(port);
}

void Service::run() {
  if (!impl_->bound)
    throw Error(ErrorCode::BindFailure, "service is not bound");
  impl_->server.listen_after_bind();
}

void Service::stop() { impl_->server.stop(); }

void serve(const ServiceConfig &cfg, const std::function<void(std::uint16_t)> &on_ready,
           const std::function<bool()> &should_stop) {
  Engine engine = make_engine(cfg);
  Service service(engine);
  const std::uint16_t port = service.bind(cfg.listen());
  std::jthread watcher([&](std::stop_token st) {
    while (!st.stop_requested()) {
      if (should_stop && should_stop()) {
        service.stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  if (on_ready)
    on_ready(port);
  service.run();
  watcher.request_stop();
}

} // namespace flowforge
