#include "flowforge/error.hpp"
#include "flowforge/remote.hpp"

#include "support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <mutex>
#include <thread>

using namespace flowforge;
using testing_support::code_of;
using nlohmann::json;

namespace {

// Local model stub on a free port; `reply` maps op -> handler.
class FakeModel {
public:
  using Handler = std::function<void(const json &, httplib::Response &)>;

  explicit FakeModel(std::map<std::string, Handler> reply) : reply_(std::move(reply)) {
    server_.Post(R"(/v1/(\w+))", [this](const httplib::Request &req, httplib::Response &res) {
      {
        std::lock_guard lock(mu_);
        auth_.push_back(req.get_header_value("Authorization"));
        bodies_.push_back(json::parse(req.body, nullptr, false));
      }
      auto it = reply_.find(req.matches[1]);
      if (it == reply_.end()) {
        res.status = 404;
        return;
      }
      it->second(json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeModel() {
    server_.stop();
    thread_.join();
  }

  [[nodiscard]] RemoteClientPtr client(std::string key = "k-123", std::size_t inflight = 4) const {
    return std::make_shared<RemoteClient>(
        RemoteEndpoint{"http://127.0.0.1:" + std::to_string(port_) + "/v1", std::move(key),
                       inflight, std::chrono::seconds(5)});
  }
  [[nodiscard]] std::vector<std::string> auth() const {
    std::lock_guard lock(mu_);
    return auth_;
  }
  [[nodiscard]] std::vector<json> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }

private:
  std::map<std::string, Handler> reply_;
  httplib::Server server_;
  int port_{0};
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<std::string> auth_;
  std::vector<json> bodies_;
};

void send(httplib::Response &res, const json &j) { res.set_content(j.dump(), "application/json"); }

Segment sample_segment() {
  Segment s;
  s.graph = make_segment_graph({testing_support::node("a", "n8n-nodes-base.code")}, {});
  s.description.segment_id = s.graph.segment_id;
  return s;
}

RemoteClientPtr dead_client() {
  // Nothing listens on port 1; connections are refused.
  return std::make_shared<RemoteClient>(
      RemoteEndpoint{"http://127.0.0.1:1", "k", 1, std::chrono::seconds(2)});
}

} // namespace

TEST(Remote, EmbedSendsBearerAndText) {
  FakeModel m({{"embed", [](const json &, httplib::Response &res) {
                  std::vector<double> v(kEmbeddingDims, 0.0);
                  v[5] = 2.0;
                  send(res, {{"embedding", v}});
                }}});
  RemoteEmbeddingProvider p(m.client());
  auto v = embed("invoice pdf", p);
  EXPECT_DOUBLE_EQ(v.values[5], 1.0);
  EXPECT_FALSE(p.deterministic());
  ASSERT_EQ(m.auth().size(), 1u);
  EXPECT_EQ(m.auth()[0], "Bearer k-123");
  EXPECT_EQ(m.bodies()[0]["text"], "invoice pdf");
}

TEST(Remote, EmbedErrors) {
  FakeModel m({{"embed", [](const json &, httplib::Response &res) {
                  send(res, {{"embedding", {1, 2, 3}}});
                }}});
  RemoteEmbeddingProvider short_dims(m.client());
  EXPECT_EQ(code_of([&] { (void)embed("x", short_dims); }), ErrorCode::ProviderUnavailable);

  FakeModel failing({{"embed", [](const json &, httplib::Response &res) { res.status = 500; }}});
  RemoteEmbeddingProvider p500(failing.client());
  EXPECT_EQ(code_of([&] { (void)embed("x", p500); }), ErrorCode::ProviderUnavailable);

  FakeModel garbage({{"embed", [](const json &, httplib::Response &res) {
                        res.set_content("not json", "text/plain");
                      }}});
  RemoteEmbeddingProvider pg(garbage.client());
  EXPECT_EQ(code_of([&] { (void)embed("x", pg); }), ErrorCode::ProviderUnavailable);

  RemoteEmbeddingProvider dead(dead_client());
  EXPECT_EQ(code_of([&] { (void)embed("x", dead); }), ErrorCode::ProviderUnavailable);
}

TEST(Remote, Annotate) {
  FakeModel m({{"annotate", [](const json &body, httplib::Response &res) {
                  send(res, {{"name", "Run code"},
                             {"description", "Runs " + body["segment"]["graph"]["nodes"][0]["ntype"]
                                                           .get<std::string>()}});
                }}});
  RemoteAnnotator a(m.client());
  auto s = a.annotate(sample_segment());
  EXPECT_EQ(s.description.segment_name, "Run code");
  EXPECT_EQ(s.description.segment_description, "Runs n8n-nodes-base.code");
  EXPECT_EQ(s.graph, sample_segment().graph);

  FakeModel partial({{"annotate", [](const json &, httplib::Response &res) {
                        send(res, {{"name", "only a name"}});
                      }}});
  RemoteAnnotator b(partial.client());
  EXPECT_EQ(code_of([&] { (void)b.annotate(sample_segment()); }), ErrorCode::AnnotatorUnavailable);
  RemoteAnnotator dead(dead_client());
  EXPECT_EQ(code_of([&] { (void)dead.annotate(sample_segment()); }),
            ErrorCode::AnnotatorUnavailable);
}

TEST(Remote, Analyze) {
  FakeModel m({{"analyze", [](const json &body, httplib::Response &res) {
                  EXPECT_EQ(body["context"].size(), 1u);
                  send(res, {{"units",
                              {{{"title", "Fetch"}, {"description", "fetch it"}},
                               {{"description", "store it"}, {"depends_on", {1}}}}}});
                }}});
  RemoteAnalyzer a(m.client());
  auto drafts = a.analyze("fetch and store", {ContextWorkflow{"wf", "desc", {"seg"}}});
  ASSERT_EQ(drafts.size(), 2u);
  EXPECT_EQ(drafts[0].title, "Fetch");
  EXPECT_FALSE(drafts[0].depends_on.has_value());
  EXPECT_EQ(drafts[1].depends_on, std::vector<std::size_t>{1});
  EXPECT_EQ(m.bodies()[0]["requirement"], "fetch and store");

  FakeModel bad({{"analyze", [](const json &, httplib::Response &res) {
                    send(res, {{"units", {{{"title", "no description"}}}}});
                  }}});
  RemoteAnalyzer b(bad.client());
  EXPECT_EQ(code_of([&] { (void)b.analyze("x", {}); }), ErrorCode::AnalyzerViolation);
  RemoteAnalyzer dead(dead_client());
  EXPECT_EQ(code_of([&] { (void)dead.analyze("x", {}); }), ErrorCode::ProviderUnavailable);
}

TEST(Remote, Generate) {
  FakeModel m({{"generate", [](const json &body, httplib::Response &res) {
                  EXPECT_EQ(body["unit"]["title"], "Parse");
                  send(res, {{"nodes",
                              {{{"node_id", "p"}, {"name", "Parse"},
                                {"ntype", "n8n-nodes-base.readPDF"}, {"role", "function"}},
                               {{"node_id", "s"}, {"name", "Send"},
                                {"ntype", "n8n-nodes-base.slack"}, {"role", "function"}}}},
                             {"edges", {{{"source", "p"}, {"source_port", 0}, {"target", "s"},
                                         {"target_port", 0}}}}});
                }}});
  RemoteGenerator g(m.client());
  auto s = g.generate(FunctionalUnit{1, "Parse", "parse the pdf", {}});
  EXPECT_TRUE(s.synthetic);
  ASSERT_EQ(s.graph.nodes.size(), 2u);
  ASSERT_EQ(s.graph.nodes[0].inputs.size(), 1u);
  EXPECT_EQ(s.graph.nodes[0].inputs[0].ptype, ParamType::Binary);
  EXPECT_NO_THROW(validate_segment(s));
  EXPECT_EQ(s.description.segment_name, "Parse");

  FakeModel bad({{"generate", [](const json &, httplib::Response &res) {
                    send(res, {{"edges", json::array()}});
                  }}});
  RemoteGenerator b(bad.client());
  EXPECT_EQ(code_of([&] { (void)b.generate(FunctionalUnit{1, "x", "x", {}}); }),
            ErrorCode::GeneratorUnavailable);
  RemoteGenerator dead(dead_client());
  EXPECT_EQ(code_of([&] { (void)dead.generate(FunctionalUnit{1, "x", "x", {}}); }),
            ErrorCode::GeneratorUnavailable);
}

TEST(Remote, InflightBoundIsShared) {
  std::atomic<int> current{0}, peak{0};
  FakeModel m({{"embed", [&](const json &, httplib::Response &res) {
                  const int now = ++current;
                  int p = peak.load();
                  while (now > p && !peak.compare_exchange_weak(p, now)) {
                  }
                  std::this_thread::sleep_for(std::chrono::milliseconds(30));
                  --current;
                  send(res, {{"embedding", std::vector<double>(kEmbeddingDims, 1.0)}});
                }}});
  auto client = m.client("k", 2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([client] {
      RemoteEmbeddingProvider p(client);
      (void)embed("x", p);
    });
  }
  for (auto &t : threads)
    t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}
