#include "flowforge/error.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/platform.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace flowforge;
using testing_support::code_of;
using testing_support::corpus_files;
using nlohmann::json;

namespace {

const char *kWebhookHttp = R"({
  "name": "Fetch on webhook",
  "nodes": [
    {"id": "w1", "name": "Webhook", "type": "n8n-nodes-base.webhook", "typeVersion": 2,
     "position": [100, 200], "webhookId": "abc", "parameters": {"path": "hook"}},
    {"id": "h1", "name": "HTTP Request", "type": "n8n-nodes-base.httpRequest", "typeVersion": 4,
     "position": [300, 200], "notes": "calls the api", "color": "#ff0000",
     "parameters": {"url": "https://example.com"}}
  ],
  "connections": {"Webhook": {"main": [[{"node": "HTTP Request", "type": "main", "index": 0}]]}},
  "pinData": {}, "settings": {"executionOrder": "v1"}
})";

ParseResult parse_text(const std::string &text, const std::string &name = "w.json") {
  return parse_n8n(SourceDocument::from_bytes(name, text));
}

} // namespace

TEST(ParseN8n, WebhookToHttpFixture) {
  const auto r = parse_text(kWebhookHttp);
  ASSERT_EQ(r.graph.nodes.size(), 2u);
  ASSERT_EQ(r.graph.edges.size(), 1u);
  EXPECT_EQ(r.graph.find("w1")->role, NodeRole::Trigger);
  EXPECT_EQ(r.graph.find("h1")->role, NodeRole::Function);
  EXPECT_EQ(r.graph.edges[0], (EdgeSpec{"w1", 0, "h1", 0}));
  EXPECT_EQ(r.graph.name, "Fetch on webhook");
  EXPECT_EQ(r.graph.description, "");
  EXPECT_EQ(r.graph.workflow_id.size(), 16u);
}

TEST(ParseN8n, StripsRedundancyKeysIntoReport) {
  const auto r = parse_text(kWebhookHttp);
  auto has = [&](const std::string &node, const std::string &key) {
    return std::find(r.strip.removed_keys.begin(), r.strip.removed_keys.end(),
                     StripEntry{node, key}) != r.strip.removed_keys.end();
  };
  EXPECT_TRUE(has("w1", "position"));
  EXPECT_TRUE(has("w1", "webhookId"));
  EXPECT_TRUE(has("h1", "notes"));
  EXPECT_TRUE(has("h1", "color"));
  EXPECT_TRUE(has("", "pinData"));
  for (const auto &n : r.graph.nodes) {
    for (const auto &key : redundancy_keys())
      EXPECT_FALSE(n.raw_config.contains(key)) << key;
  }
  EXPECT_EQ(r.graph.find("h1")->raw_config.at("parameters").at("url"), "https://example.com");
  EXPECT_EQ(r.graph.find("h1")->raw_config.at("typeVersion"), 4);
  EXPECT_EQ(r.positions.at("w1"), (Position{100, 200}));
  EXPECT_EQ(r.positions.at("h1"), (Position{300, 200}));
}

TEST(ParseN8n, LayoutDoesNotChangeWorkflowId) {
  std::string moved = kWebhookHttp;
  moved.replace(moved.find("[300, 200]"), 10, "[900, 10]");
  moved.replace(moved.find("\"#ff0000\""), 9, "\"#00ff00\"");
  EXPECT_EQ(parse_text(kWebhookHttp).graph.workflow_id, parse_text(moved).graph.workflow_id);
  std::string changed = kWebhookHttp;
  changed.replace(changed.find("https://example.com"), 19, "https://example.org");
  EXPECT_NE(parse_text(kWebhookHttp).graph.workflow_id, parse_text(changed).graph.workflow_id);
}

TEST(ParseN8n, PortIndicesBecomeEdgePorts) {
  const auto r = parse_text(R"({"nodes": [
      {"id": "t", "name": "T", "type": "n8n-nodes-base.manualTrigger", "position": [0, 0]},
      {"id": "i", "name": "If", "type": "n8n-nodes-base.if", "position": [1, 0]},
      {"id": "m", "name": "Merge", "type": "n8n-nodes-base.merge", "position": [2, 0]}],
    "connections": {
      "T": {"main": [[{"node": "If", "type": "main", "index": 0}]]},
      "If": {"main": [[{"node": "Merge", "type": "main", "index": 0}],
                      [{"node": "Merge", "type": "main", "index": 1}]]}}})");
  auto edges = r.graph.edges;
  std::sort(edges.begin(), edges.end());
  EXPECT_EQ(edges, (std::vector<EdgeSpec>{{"i", 0, "m", 0}, {"i", 1, "m", 1}, {"t", 0, "i", 0}}));
}

TEST(ParseN8n, TriggerRoleRule) {
  EXPECT_TRUE(is_trigger_type("n8n-nodes-base.scheduleTrigger"));
  EXPECT_TRUE(is_trigger_type("@n8n/n8n-nodes-langchain.chatTrigger"));
  EXPECT_TRUE(is_trigger_type("custom.TRIGGERED"));
  EXPECT_TRUE(is_trigger_type("n8n-nodes-base.start"));
  EXPECT_FALSE(is_trigger_type("n8n-nodes-base.httpRequest"));
  EXPECT_FALSE(is_trigger_type("n8n-nodes-base.starter"));
  EXPECT_TRUE(is_trigger_type("n8n-nodes-base.webhook"));
  EXPECT_FALSE(is_trigger_type("n8n-nodes-base.respondToWebhook"));
}

TEST(ParseN8n, CredentialsAndForeignConnectionTypesWarn) {
  const auto r = parse_text(R"({"nodes": [
      {"id": "a", "name": "A", "type": "@n8n/n8n-nodes-langchain.agent", "position": [0, 0],
       "credentials": {"openAiApi": {"id": "1"}}},
      {"id": "b", "name": "B", "type": "@n8n/n8n-nodes-langchain.lmChatOpenAi", "position": [0, 1]}],
    "connections": {"B": {"ai_languageModel": [[{"node": "A", "type": "ai_languageModel", "index": 0}]]}}})");
  EXPECT_TRUE(r.graph.edges.empty());
  EXPECT_EQ(r.warnings.size(), 2u);
  EXPECT_FALSE(r.graph.find("a")->raw_config.contains("credentials"));
}

TEST(ParseN8n, Errors) {
  EXPECT_EQ(code_of([] { (void)parse_text("{not json"); }), ErrorCode::MalformedDocument);
  EXPECT_EQ(code_of([] { (void)parse_text("[]"); }), ErrorCode::MalformedDocument);
  EXPECT_EQ(code_of([] { (void)parse_text(kWebhookHttp, "w.txt"); }), ErrorCode::UnsupportedFormat);
  EXPECT_EQ(code_of([] {
              (void)parse_text(R"({"nodes": [{"id": "a", "name": "A", "type": "x"}],
                "connections": {"A": {"main": [[{"node": "Ghost", "type": "main", "index": 0}]]}}})");
            }),
            ErrorCode::DanglingConnection);
  EXPECT_EQ(code_of([] {
              (void)parse_text(R"({"nodes": [{"id": "a", "name": "A", "type": "x"}],
                "connections": {"Ghost": {"main": [[{"node": "A", "type": "main", "index": 0}]]}}})");
            }),
            ErrorCode::DanglingConnection);
}

TEST(ParseN8n, YamlMatchesJson) {
  const std::string yaml = R"(name: Fetch on webhook
nodes:
  - id: w1
    name: Webhook
    type: n8n-nodes-base.webhook
    typeVersion: 2
    position: [100, 200]
    webhookId: abc
    parameters:
      path: hook
  - id: h1
    name: HTTP Request
    type: n8n-nodes-base.httpRequest
    typeVersion: 4
    position: [300, 200]
    notes: calls the api
    color: "#ff0000"
    parameters:
      url: https://example.com
connections:
  Webhook:
    main:
      - - node: HTTP Request
          type: main
          index: 0
pinData: {}
settings:
  executionOrder: v1
)";
  const auto a = parse_text(kWebhookHttp);
  const auto b = parse_text(yaml, "w.yaml");
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.positions, b.positions);
}

TEST(ParseN8n, YamlQuotedScalarsStayStrings) {
  const auto r = parse_text(R"(nodes:
  - id: "7"
    name: "true"
    type: x.y
    typeVersion: 1
    parameters: {count: 3, flag: yes, label: "3", ratio: 0.5, none: ~}
connections: {}
)",
                            "w.yml");
  const auto &p = r.graph.nodes.at(0).raw_config.at("parameters");
  EXPECT_EQ(r.graph.nodes[0].node_id, "7");
  EXPECT_EQ(r.graph.nodes[0].name, "true");
  EXPECT_EQ(p.at("count"), 3);
  EXPECT_EQ(p.at("label"), "3");
  EXPECT_EQ(p.at("ratio"), 0.5);
  EXPECT_TRUE(p.at("none").is_null());
}

TEST(NodeIo, HttpRequestOutputsJsonResponse) {
  const auto io = infer_node_io("n8n-nodes-base.httpRequest", false);
  EXPECT_NE(std::find(io.outputs.begin(), io.outputs.end(), ParamSpec{"response", ParamType::Json, false}),
            io.outputs.end());
}

TEST(NodeIo, UnknownTypeGetsOptionalAnyPorts) {
  const auto io = infer_node_io("acme.frobnicate", false);
  EXPECT_EQ(io.inputs, (std::vector<ParamSpec>{{"main", ParamType::Any, false}}));
  EXPECT_EQ(io.outputs, (std::vector<ParamSpec>{{"main", ParamType::Any, false}}));
}

TEST(NodeIo, TriggersHaveNoInputs) {
  EXPECT_TRUE(infer_node_io("n8n-nodes-base.webhook", true).inputs.empty());
  EXPECT_TRUE(infer_node_io("acme.somethingTrigger", true).inputs.empty());
  EXPECT_FALSE(infer_node_io("n8n-nodes-base.webhook", true).outputs.empty());
}

TEST(NodeIo, LongestPrefixWins) {
  const auto merge = infer_node_io("n8n-nodes-base.merge", false);
  EXPECT_EQ(merge.inputs.size(), 2u);
  const auto pdf = infer_node_io("n8n-nodes-base.readPDF", false);
  ASSERT_EQ(pdf.inputs.size(), 1u);
  EXPECT_EQ(pdf.inputs[0].ptype, ParamType::Binary);
}

TEST(EmitN8n, WritesPositionsAndRoundTrips) {
  const auto r = parse_text(kWebhookHttp);
  const auto doc = emit_n8n(r.graph, r.positions);
  EXPECT_EQ(doc.format, DocFormat::Json);
  const json j = json::parse(doc.bytes);
  for (const auto &n : j.at("nodes"))
    EXPECT_EQ(n.at("position").size(), 2u);
  EXPECT_EQ(j.at("connections").at("Webhook").at("main")[0][0].at("node"), "HTTP Request");
  const auto back = parse_n8n(doc);
  EXPECT_TRUE(graphs_isomorphic_modulo_layout(r.graph, back.graph));
  EXPECT_EQ(back.positions, r.positions);
}

TEST(EmitN8n, MissingPositionIsAnError) {
  const auto r = parse_text(kWebhookHttp);
  Positions partial{{"w1", {0, 0}}};
  EXPECT_EQ(code_of([&] { (void)emit_n8n(r.graph, partial); }), ErrorCode::MissingPosition);
}

TEST(EmitN8n, DuplicateNamesAndInvalidGraphsAreErrors) {
  using namespace testing_support;
  auto g = graph({node("a", "x"), node("b", "y")}, {edge("a", "b")});
  g.nodes[1].name = "a";
  Positions pos{{"a", {0, 0}}, {"b", {1, 0}}};
  EXPECT_EQ(code_of([&] { (void)emit_n8n(g, pos); }), ErrorCode::DuplicateNodeName);
  auto h = graph({node("a", "x")}, {edge("a", "ghost")});
  EXPECT_EQ(code_of([&] { (void)emit_n8n(h, {{"a", {0, 0}}}); }), ErrorCode::InvalidGraph);
}

TEST(EmitN8n, EngineNodeTypesSurviveRoundTrip) {
  using namespace testing_support;
  auto conn = node("c", std::string(kConnectorType), NodeRole::Connector);
  auto ph = node("p", std::string(kPlaceholderType));
  auto g = graph({node("t", std::string(kManualTriggerType), NodeRole::Trigger), conn, ph},
                 {edge("t", "c"), edge("c", "p")});
  Positions pos{{"t", {0, 0}}, {"c", {280, 0}}, {"p", {560, 0}}};
  const auto back = parse_n8n(emit_n8n(g, pos)).graph;
  EXPECT_EQ(back.find("c")->role, NodeRole::Connector);
  EXPECT_EQ(back.find("t")->role, NodeRole::Trigger);
  EXPECT_TRUE(graphs_isomorphic_modulo_layout(g, back));
}

TEST(CorpusRoundTrip, EveryFileSurvivesParseEmitParse) {
  const auto files = corpus_files();
  ASSERT_EQ(files.size(), 12u);
  for (const auto &f : files) {
    const auto first = parse_n8n(SourceDocument::from_file(f));
    const auto again = parse_n8n(emit_n8n(first.graph, first.positions));
    EXPECT_TRUE(graphs_isomorphic_modulo_layout(first.graph, again.graph)) << f;
    EXPECT_EQ(first.graph.workflow_id, again.graph.workflow_id) << f;
    EXPECT_EQ(3u <= first.graph.nodes.size() && first.graph.nodes.size() <= 15u, true) << f;
  }
}

TEST(CorpusRoundTrip, AdapterDelegatesToN8n) {
  const auto &a = adapter_for("n8n");
  EXPECT_EQ(a.platform(), "n8n");
  EXPECT_EQ(a.start_node().ntype, kManualTriggerType);
  EXPECT_FALSE(a.terminator_node().has_value());
  EXPECT_EQ(code_of([] { (void)adapter_for("dify"); }), ErrorCode::UnsupportedPlatform);
}
