#include "flowforge/construction.hpp"
#include "flowforge/error.hpp"
#include "flowforge/ingest.hpp"
#include "flowforge/platform.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <stdexcept>

using namespace flowforge;
using testing_support::code_of;
using testing_support::edge;
using testing_support::graph;
using testing_support::node;

namespace {

Segment segment_of(std::vector<NodeSpec> nodes, std::vector<EdgeSpec> edges,
                   const std::string &name = "seg") {
  Segment s;
  s.graph = make_segment_graph(std::move(nodes), std::move(edges));
  s.description.segment_id = s.graph.segment_id;
  s.description.segment_name = name;
  s.description.segment_description = name;
  return s;
}

UnitResolution generated(std::size_t id, Segment s) {
  return UnitResolution{id, Route::Generated, std::move(s), std::nullopt};
}

TaskPlan chain_plan(std::size_t n) {
  TaskPlan p;
  p.requirement_text = "build something useful";
  for (std::size_t i = 1; i <= n; ++i) {
    FunctionalUnit u;
    u.unit_id = i;
    u.title = "unit " + std::to_string(i);
    u.description = u.title;
    if (i > 1)
      u.depends_on = {i - 1};
    p.units.push_back(u);
  }
  return p;
}

std::size_t count_type(const WorkflowGraph &g, std::string_view ntype) {
  return static_cast<std::size_t>(std::count_if(
      g.nodes.begin(), g.nodes.end(), [&](const NodeSpec &n) { return n.ntype == ntype; }));
}

struct CorpusRepo {
  Repository repo{make_default_provider()};
  CorpusRepo() {
    StubAnnotator ann;
    for (const auto &g : testing_support::corpus_graphs())
      (void)ingest_graph(repo, g, ann);
  }
};

} // namespace

TEST(Construction, DiamondPositions) {
  auto g = graph({node("t", "n8n-nodes-base.manualTrigger", NodeRole::Trigger),
                  node("a", "n8n-nodes-base.code"), node("b", "n8n-nodes-base.set"),
                  node("c", "n8n-nodes-base.merge")},
                 {edge("t", "a"), edge("t", "b"), edge("a", "c"), edge("b", "c", 0, 1)});
  auto pos = layered_positions(g);
  EXPECT_EQ(pos.at("t"), (Position{0, 0}));
  EXPECT_EQ(pos.at("a"), (Position{280, 0}));
  EXPECT_EQ(pos.at("b"), (Position{280, 160}));
  EXPECT_EQ(pos.at("c"), (Position{560, 0}));
}

TEST(Construction, LongestPathLayering) {
  auto g = graph({node("a", "n8n-nodes-base.code"), node("b", "n8n-nodes-base.set"),
                  node("c", "n8n-nodes-base.noOp"), node("d", "n8n-nodes-base.noOp")},
                 {edge("a", "b"), edge("b", "c"), edge("a", "c"), edge("a", "d")});
  auto pos = layered_positions(g);
  EXPECT_EQ(pos.at("c"), (Position{560, 0}));
  EXPECT_EQ(pos.at("b"), (Position{280, 0}));
  EXPECT_EQ(pos.at("d"), (Position{280, 160}));
}

TEST(Construction, CompatibilityByName) {
  auto up = make_segment_graph({node("o", "n8n-nodes-base.openAi")}, {});
  auto down = make_segment_graph({node("s", "n8n-nodes-base.slack")}, {});
  auto r = check_compatibility(up, down);
  ASSERT_EQ(r.satisfied.size(), 1u);
  EXPECT_TRUE(r.satisfied[0].by_name);
  EXPECT_EQ(r.satisfied[0].output.name, "text");
  EXPECT_TRUE(r.unsatisfied.empty());
  EXPECT_FALSE(r.needs_connector);
}

TEST(Construction, CompatibilityByUniqueType) {
  // agent outputs `output: string`; html requires `html: string`.
  auto agent = make_segment_graph({node("a", "@n8n/n8n-nodes-langchain.agent")}, {});
  auto down = make_segment_graph({node("h", "n8n-nodes-base.html")}, {});
  auto r = check_compatibility(agent, down);
  ASSERT_EQ(r.satisfied.size(), 1u);
  EXPECT_FALSE(r.satisfied[0].by_name);
  EXPECT_EQ(r.satisfied[0].output.name, "output");
  EXPECT_TRUE(r.needs_connector);
}

TEST(Construction, CompatibilityUnsatisfied) {
  auto up = make_segment_graph({node("h", "n8n-nodes-base.httpRequest")}, {});
  auto down = make_segment_graph({node("p", "n8n-nodes-base.readPDF")}, {});
  auto r = check_compatibility(up, down);
  EXPECT_TRUE(r.satisfied.empty());
  ASSERT_EQ(r.unsatisfied.size(), 1u);
  EXPECT_EQ(r.unsatisfied[0].name, "file");
  EXPECT_TRUE(r.needs_connector);

  // Two compatible candidates make the type fallback ambiguous.
  auto branch = make_segment_graph({node("w", "n8n-nodes-base.if")}, {});
  auto responder = make_segment_graph({node("r", "n8n-nodes-base.respondToWebhook")}, {});
  auto amb = check_compatibility(branch, responder);
  EXPECT_EQ(amb.unsatisfied.size(), 1u);
}

TEST(Construction, OptionalInputsNeedNothing) {
  auto up = make_segment_graph({node("p", "n8n-nodes-base.readPDF")}, {});
  auto down = make_segment_graph({node("h", "n8n-nodes-base.httpRequest")}, {});
  auto r = check_compatibility(up, down);
  EXPECT_TRUE(r.satisfied.empty());
  EXPECT_TRUE(r.unsatisfied.empty());
  EXPECT_FALSE(r.needs_connector);
}

TEST(Construction, ConnectorCountFollowsCompatibility) {
  // openAi -> slack matches by name; slack -> readPDF does not.
  auto plan = chain_plan(3);
  std::vector<UnitResolution> res{
      generated(1, segment_of({node("o", "n8n-nodes-base.openAi")}, {})),
      generated(2, segment_of({node("s", "n8n-nodes-base.slack")}, {})),
      generated(3, segment_of({node("p", "n8n-nodes-base.readPDF")}, {}))};
  auto a = assemble(plan, res);
  EXPECT_EQ(a.connectors_inserted, 1u);
  EXPECT_EQ(count_type(a.graph, kConnectorType), 1u);
  EXPECT_TRUE(validate_graph(a.graph).ok());
  EXPECT_EQ(a.graph.nodes.size(), 4u);
  EXPECT_EQ(a.graph.edges.size(), 3u);
  const NodeSpec *c = a.graph.find("connector@u2-u3");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->role, NodeRole::Connector);
  EXPECT_EQ(c->raw_config["parameters"]["unsatisfied"][0]["name"], "file");
  EXPECT_NE(a.graph.find("o@u1"), nullptr);
}

TEST(Construction, AssemblyMakesNamesUnique) {
  auto plan = chain_plan(2);
  auto s = segment_of({node("x", "n8n-nodes-base.code")}, {});
  auto a = assemble(plan, {generated(1, s), generated(2, s)});
  ASSERT_EQ(a.graph.nodes.size(), 2u);
  EXPECT_NE(a.graph.nodes[0].name, a.graph.nodes[1].name);
  EXPECT_EQ(a.connectors_inserted, 0u);
}

TEST(Construction, AssemblyJoinsSinksToSources) {
  TaskPlan plan = chain_plan(3);
  plan.units[2].depends_on = {1, 2};
  auto fan = segment_of({node("a", "n8n-nodes-base.code"), node("b", "n8n-nodes-base.set"),
                         node("c", "n8n-nodes-base.set")},
                        {edge("a", "b"), edge("a", "c")});
  auto one = segment_of({node("x", "n8n-nodes-base.noOp")}, {});
  auto a = assemble(plan, {generated(1, fan), generated(2, one), generated(3, one)});
  // 2 internal + (2 sinks -> 1 source) + (1 -> 1) + (2 -> 1).
  EXPECT_EQ(a.graph.edges.size(), 2u + 2u + 1u + 2u);
  EXPECT_TRUE(validate_graph(a.graph).ok());
}

TEST(Construction, AssemblyFailures) {
  auto plan = chain_plan(2);
  auto s = segment_of({node("x", "n8n-nodes-base.code")}, {});
  EXPECT_EQ(code_of([&] { (void)assemble(plan, {generated(1, s)}); }), ErrorCode::AssemblyFailure);
  EXPECT_EQ(code_of([&] { (void)assemble(plan, {generated(1, s), generated(1, s)}); }),
            ErrorCode::AssemblyFailure);
  Segment broken = s;
  broken.graph.internal_edges.push_back(edge("x", "missing"));
  EXPECT_EQ(code_of([&] { (void)assemble(plan, {generated(1, s), generated(2, broken)}); }),
            ErrorCode::AssemblyFailure);
}

TEST(Construction, StubGeneratorPlaceholder) {
  StubGenerator gen;
  FunctionalUnit u{1, "Parse the file", "Parse the file into rows", {}};
  auto r = generate_unit(u, gen);
  EXPECT_EQ(r.route, Route::Generated);
  EXPECT_FALSE(r.score.has_value());
  EXPECT_TRUE(r.segment.synthetic);
  ASSERT_EQ(r.segment.graph.nodes.size(), 1u);
  EXPECT_EQ(r.segment.graph.nodes[0].ntype, kPlaceholderType);
  EXPECT_EQ(r.segment.graph.nodes[0].name, "Parse the file");
  EXPECT_NO_THROW(validate_segment(r.segment));
}

TEST(Construction, GeneratorFailureIsUnavailable) {
  struct Broken final : SegmentGenerator {
    Segment generate(const FunctionalUnit &) override { throw std::runtime_error("down"); }
  };
  Broken gen;
  FunctionalUnit u{1, "x", "x", {}};
  EXPECT_EQ(code_of([&] { (void)generate_unit(u, gen); }), ErrorCode::GeneratorUnavailable);
}

TEST(Construction, ThreeStepRequirementRetrievesEverything) {
  CorpusRepo c;
  auto segs = c.repo.list_segments();
  ASSERT_GE(segs.size(), 3u);
  const std::string req = "Step 1: " + index_text(segs[0].description) +
                          " Step 2: " + index_text(segs[1].description) +
                          " Step 3: " + index_text(segs[2].description);
  StubAnalyzer an;
  StubGenerator gen;
  auto r = construct(req, c.repo, ConstructOptions{}, an, gen);
  ASSERT_EQ(r.resolutions.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.resolutions[i].route, Route::Retrieved);
    EXPECT_EQ(r.resolutions[i].segment.graph.segment_id, segs[i].graph.segment_id);
    ASSERT_TRUE(r.resolutions[i].score.has_value());
    EXPECT_GT(*r.resolutions[i].score, 0.6);
  }
  EXPECT_EQ(count_type(r.graph, kPlaceholderType), 0u);
  EXPECT_EQ(count_type(r.graph, kManualTriggerType), 1u);
  EXPECT_TRUE(validate_graph(r.graph).ok());
}

TEST(Construction, RoutesAgreeWithRetrievalReplay) {
  CorpusRepo c;
  StubAnalyzer an;
  StubGenerator gen;
  const std::vector<std::string> reqs{
      "Fetch invoices and archive the PDF. Post a weather alert. Something unrelated entirely.",
      "- summarize github issues\n- send a daily digest email\n- write rows to a sheet",
      "1. read rss 2. translate text 3. upload to drive"};
  for (const auto &req : reqs) {
    for (double theta : {0.0, 0.3, 0.6, 0.9}) {
      ConstructOptions opt;
      opt.retrieval = {10, theta};
      auto r = construct(req, c.repo, opt, an, gen);
      for (const auto &res : r.resolutions) {
        const auto &unit = r.plan.units[res.unit_id - 1];
        auto replay = c.repo.retrieve(unit.description, opt.retrieval);
        if (res.route == Route::Retrieved) {
          ASSERT_FALSE(replay.empty());
          EXPECT_EQ(res.segment.graph.segment_id, replay.front().segment_id);
          EXPECT_DOUBLE_EQ(*res.score, replay.front().score);
          EXPECT_GT(*res.score, theta);
        } else {
          EXPECT_TRUE(replay.empty());
          EXPECT_TRUE(res.segment.synthetic);
        }
      }
    }
  }
}

TEST(Construction, ThresholdGateGeneratesEveryUnit) {
  CorpusRepo c;
  StubAnalyzer an;
  StubGenerator gen;
  auto segs = c.repo.list_segments();
  const std::string req = index_text(segs[0].description) + ". Then notify the team.";
  ConstructOptions opt;
  opt.retrieval = {10, 1.0};
  auto r = construct(req, c.repo, opt, an, gen);
  ASSERT_EQ(r.resolutions.size(), 2u);
  for (const auto &res : r.resolutions)
    EXPECT_EQ(res.route, Route::Generated);
  EXPECT_EQ(count_type(r.graph, kPlaceholderType), 2u);
  auto parsed = parse_n8n(r.deploy_doc);
  EXPECT_TRUE(validate_graph(parsed.graph).ok());
  EXPECT_TRUE(graphs_isomorphic_modulo_layout(parsed.graph, r.graph));
}

TEST(Construction, ForceGenerativeSkipsRetrieval) {
  CorpusRepo c;
  StubAnalyzer an;
  StubGenerator gen;
  auto segs = c.repo.list_segments();
  ConstructOptions opt;
  opt.force_generative = true;
  auto r = construct(index_text(segs[0].description), c.repo, opt, an, gen);
  ASSERT_EQ(r.resolutions.size(), 1u);
  EXPECT_EQ(r.resolutions[0].route, Route::Generated);
}

TEST(Construction, DeployDocRoundTrips) {
  CorpusRepo c;
  StubAnalyzer an;
  StubGenerator gen;
  const std::vector<std::string> reqs{
      "Step 1: " + index_text(c.repo.list_segments()[3].description) +
          " Step 2: send a message to slack",
      "1. read a pdf 2. summarize it 3. email the summary", "one single vague wish"};
  for (const auto &req : reqs) {
    auto r = construct(req, c.repo, ConstructOptions{}, an, gen);
    auto parsed = parse_n8n(r.deploy_doc);
    EXPECT_TRUE(parsed.warnings.empty());
    EXPECT_TRUE(graphs_isomorphic_modulo_layout(parsed.graph, r.graph)) << req;
    auto again = emit_n8n(parsed.graph, parsed.positions);
    EXPECT_EQ(again.bytes, r.deploy_doc.bytes);
    const auto positions = layered_positions(r.graph);
    EXPECT_EQ(parsed.positions.size(), r.graph.nodes.size());
    for (const auto &[id, p] : positions)
      EXPECT_EQ(parsed.positions.at(id), p);
  }
}

TEST(Construction, AdaptationInjectsStartOnlyWhenNeeded) {
  auto bare = graph({node("a", "n8n-nodes-base.code"), node("b", "n8n-nodes-base.set")},
                    {edge("a", "b")});
  auto out = adapt_platform(bare, "n8n");
  ASSERT_EQ(out.graph.nodes.size(), 3u);
  EXPECT_EQ(out.graph.nodes.back().role, NodeRole::Trigger);
  EXPECT_EQ(out.graph.edges.back().target, "a");

  auto triggered = graph({node("t", "n8n-nodes-base.manualTrigger", NodeRole::Trigger),
                          node("a", "n8n-nodes-base.code")},
                         {edge("t", "a")});
  EXPECT_EQ(adapt_platform(triggered, "n8n").graph.nodes.size(), 2u);

  auto loop = graph({node("a", "n8n-nodes-base.code"), node("b", "n8n-nodes-base.set")},
                    {edge("a", "b"), edge("b", "a")});
  auto looped = adapt_platform(loop, "n8n");
  ASSERT_EQ(looped.graph.nodes.size(), 3u);
  EXPECT_EQ(looped.graph.edges.back().target, "a");

  EXPECT_EQ(code_of([&] { (void)adapt_platform(bare, "dify"); }), ErrorCode::UnsupportedPlatform);
}
