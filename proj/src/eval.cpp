#include "flowforge/eval.hpp"

#include "flowforge/error.hpp"
#include "flowforge/ingest.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace flowforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
  case Strategy::RetrievalAugmented:
    return "retrieval_augmented";
  case Strategy::ZeroShotGenerative:
    return "zero_shot_generative";
  }
  return "retrieval_augmented";
}

std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
  if (s == "retrieval_augmented")
    return Strategy::RetrievalAugmented;
  if (s == "zero_shot_generative")
    return Strategy::ZeroShotGenerative;
  return std::nullopt;
}

namespace {

bool is_document(const fs::path &p) {
  const auto ext = p.extension().string();
  return ext == ".json" || ext == ".yml" || ext == ".yaml";
}

template <typename Case> void sort_cases(std::vector<Case> &cases) {
  std::sort(cases.begin(), cases.end(), [](const Case &a, const Case &b) {
    return std::tie(a.workflow_id, a.source) < std::tie(b.workflow_id, b.source);
  });
}

template <typename Case, typename Fn> double mean_of(const std::vector<Case> &cases, Fn fn) {
  if (cases.empty())
    return 0.0;
  double sum = 0.0;
  for (const auto &c : cases)
    sum += fn(c);
  return sum / static_cast<double>(cases.size());
}

std::string fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

} // namespace

std::vector<CorpusEntry> load_corpus(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::CorpusError, "corpus directory not found: " + dir.string());

  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_document(entry.path()))
      files.push_back(entry.path());
  }
  if (files.empty())
    throw Error(ErrorCode::CorpusError, "corpus directory holds no workflows: " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<CorpusEntry> corpus;
  for (const auto &path : files) {
    CorpusEntry e;
    e.source = path.filename().string();
    try {
      e.graph = parse_n8n(SourceDocument::from_file(path)).graph;
    } catch (const Error &err) {
      throw Error(ErrorCode::CorpusError, e.source + ": " + err.what());
    }
    const fs::path override_path = dir / "decompositions" / (path.stem().string() + ".json");
    if (fs::is_regular_file(override_path, ec)) {
      try {
        std::ifstream in(override_path);
        e.decomposition = json::parse(in).get<Decomposition>();
      } catch (const std::exception &err) {
        throw Error(ErrorCode::CorpusError, override_path.string() + ": " + err.what());
      }
    }
    corpus.push_back(std::move(e));
  }
  return corpus;
}

bool ExtractionCase::flagged() const noexcept {
  return !reconstructible || node_coverage < 1.0 || edge_validity < 1.0 ||
         !misallocated.empty() || !omitted.empty();
}

double EvalReport::mean_node_coverage() const noexcept {
  return mean_of(extraction, [](const ExtractionCase &c) { return c.node_coverage; });
}
double EvalReport::mean_edge_validity() const noexcept {
  return mean_of(extraction, [](const ExtractionCase &c) { return c.edge_validity; });
}
std::size_t EvalReport::reconstructible_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      extraction.begin(), extraction.end(), [](const auto &c) { return c.reconstructible; }));
}
double EvalReport::mean_node_type_f1() const noexcept {
  return mean_of(construction, [](const ConstructionCase &c) { return c.node_type_f1; });
}
double EvalReport::mean_edge_f1() const noexcept {
  return mean_of(construction, [](const ConstructionCase &c) { return c.edge_f1; });
}
std::size_t EvalReport::exact_match_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      construction.begin(), construction.end(), [](const auto &c) { return c.exact_match; }));
}

EvalReport eval_extraction(const std::vector<CorpusEntry> &corpus) {
  EvalReport report;
  report.extraction.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const CorpusEntry &e = corpus[i];
    const Decomposition d = e.decomposition ? *e.decomposition : decompose_structural(e.graph);
    const ExtractionReport r = validate_decomposition(e.graph, d);
    report.extraction[i] = ExtractionCase{e.graph.workflow_id, e.source,      r.node_coverage,
                                          r.edge_validity,    r.reconstructible, r.misallocated,
                                          r.omitted};
  }
  sort_cases(report.extraction);
  return report;
}

EvalReport eval_extraction(const fs::path &dir) { return eval_extraction(load_corpus(dir)); }

EvalReport eval_construction(const std::vector<CorpusEntry> &corpus, Strategy strategy,
                             const EvalOptions &options) {
  if (corpus.empty())
    throw Error(ErrorCode::CorpusError, "corpus is empty");
  options.retrieval.validate();

  std::unique_ptr<Repository> shared;
  if (!options.isolated_seeding) {
    shared = std::make_unique<Repository>(make_default_provider());
    StubAnnotator annotator;
    for (const auto &e : corpus)
      (void)ingest_graph(*shared, e.graph, annotator, options.max_inflight);
  }

  ConstructOptions copts;
  copts.retrieval = options.retrieval;
  copts.max_inflight = 1;
  copts.force_generative = strategy == Strategy::ZeroShotGenerative;

  EvalReport report;
  report.strategy = strategy;
  report.construction.resize(corpus.size());
  for_each_bounded(corpus.size(), options.max_inflight, [&](std::size_t i) {
    const CorpusEntry &e = corpus[i];
    std::unique_ptr<Repository> own;
    const Repository *repo = shared.get();
    if (!repo) {
      own = std::make_unique<Repository>(make_default_provider());
      StubAnnotator annotator;
      (void)ingest_graph(*own, e.graph, annotator, 1);
      repo = own.get();
    }
    StubAnalyzer analyzer;
    StubGenerator generator;
    const std::string requirement =
        e.graph.description.empty() ? e.graph.name : e.graph.description;
    const ConstructionResult built = construct(requirement, *repo, copts, analyzer, generator);
    const GraphScore s = score_graph(built.graph, e.graph);

    ConstructionCase c{e.graph.workflow_id, e.source, s.node_type_f1, s.edge_f1, s.exact_match,
                       0, 0};
    for (const auto &r : built.resolutions)
      ++(r.route == Route::Retrieved ? c.retrieved_units : c.generated_units);
    report.construction[i] = std::move(c);
  });
  sort_cases(report.construction);
  return report;
}

EvalReport eval_construction(const fs::path &dir, Strategy strategy, const EvalOptions &options) {
  return eval_construction(load_corpus(dir), strategy, options);
}

WorkflowGraph core_graph(const WorkflowGraph &g) {
  WorkflowGraph core;
  core.workflow_id = g.workflow_id;
  core.name = g.name;
  core.description = g.description;

  std::set<NodeId> connectors, dropped;
  for (const auto &n : g.nodes) {
    if (n.role == NodeRole::Trigger)
      dropped.insert(n.node_id);
    else if (n.role == NodeRole::Connector)
      connectors.insert(n.node_id);
    else
      core.nodes.push_back(n);
  }

  std::set<EdgeSpec> edges(g.edges.begin(), g.edges.end());
  for (const auto &c : connectors) {
    std::vector<EdgeSpec> in, out;
    for (auto it = edges.begin(); it != edges.end();) {
      if (it->target == c && it->source == c) {
        it = edges.erase(it);
        continue;
      }
      if (it->target == c)
        in.push_back(*it);
      else if (it->source == c)
        out.push_back(*it);
      else {
        ++it;
        continue;
      }
      it = edges.erase(it);
    }
    for (const auto &a : in)
      for (const auto &b : out)
        edges.insert(EdgeSpec{a.source, a.source_port, b.target, b.target_port});
  }
  for (const auto &e : edges) {
    if (!dropped.contains(e.source) && !dropped.contains(e.target))
      core.edges.push_back(e);
  }
  return core;
}

double multiset_f1(std::vector<std::string> predicted, std::vector<std::string> reference) {
  if (predicted.empty() && reference.empty())
    return 1.0;
  std::sort(predicted.begin(), predicted.end());
  std::sort(reference.begin(), reference.end());
  std::vector<std::string> common;
  std::set_intersection(predicted.begin(), predicted.end(), reference.begin(), reference.end(),
                        std::back_inserter(common));
  if (common.empty())
    return 0.0;
  const double tp = static_cast<double>(common.size());
  const double precision = tp / static_cast<double>(predicted.size());
  const double recall = tp / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::vector<std::string> node_types(const WorkflowGraph &g) {
  std::vector<std::string> out;
  for (const auto &n : g.nodes)
    out.push_back(n.ntype);
  return out;
}

std::vector<std::string> edge_types(const WorkflowGraph &g) {
  std::map<NodeId, std::string> type_of;
  for (const auto &n : g.nodes)
    type_of[n.node_id] = n.ntype;
  std::vector<std::string> out;
  for (const auto &e : g.edges)
    out.push_back(type_of[e.source] + "\n" + type_of[e.target]);
  return out;
}

} // namespace

GraphScore score_graph(const WorkflowGraph &constructed, const WorkflowGraph &original) {
  const WorkflowGraph a = core_graph(constructed);
  const WorkflowGraph b = core_graph(original);
  return GraphScore{multiset_f1(node_types(a), node_types(b)),
                    multiset_f1(edge_types(a), edge_types(b)),
                    graphs_isomorphic_modulo_layout(a, b)};
}

std::string render_table(const EvalReport &extraction, const EvalReport &construction) {
  struct Row {
    const ExtractionCase *x{nullptr};
    const ConstructionCase *c{nullptr};
  };
  std::map<std::pair<std::string, std::string>, Row> rows;
  for (const auto &x : extraction.extraction)
    rows[{x.workflow_id, x.source}].x = &x;
  for (const auto &c : construction.construction)
    rows[{c.workflow_id, c.source}].c = &c;

  const std::vector<std::string> header{"workflow_id", "node_coverage", "edge_validity",
                                        "reconstructible", "node_type_f1", "edge_f1",
                                        "exact_match"};
  std::vector<std::vector<std::string>> cells{header};
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  for (const auto &[key, row] : rows) {
    std::vector<std::string> line{key.first};
    if (row.x) {
      line.push_back(fixed(row.x->node_coverage));
      line.push_back(fixed(row.x->edge_validity));
      line.push_back(flag(row.x->reconstructible));
    } else {
      line.insert(line.end(), 3, "-");
    }
    if (row.c) {
      line.push_back(fixed(row.c->node_type_f1));
      line.push_back(fixed(row.c->edge_f1));
      line.push_back(flag(row.c->exact_match));
    } else {
      line.insert(line.end(), 3, "-");
    }
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto &line : cells)
    for (std::size_t i = 0; i < line.size(); ++i)
      width[i] = std::max(width[i], line[i].size());
  std::ostringstream os;
  for (const auto &line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      os << line[i];
      if (i + 1 < line.size())
        os << std::string(width[i] - line[i].size() + 2, ' ');
    }
    os << '\n';
  }
  return os.str();
}

void to_json(json &j, const ExtractionCase &c) {
  j = json{{"workflow_id", c.workflow_id},   {"source", c.source},
           {"node_coverage", c.node_coverage}, {"edge_validity", c.edge_validity},
           {"reconstructible", c.reconstructible}, {"misallocated", c.misallocated},
           {"omitted", c.omitted},           {"flagged", c.flagged()}};
}

void to_json(json &j, const ConstructionCase &c) {
  j = json{{"workflow_id", c.workflow_id},       {"source", c.source},
           {"node_type_f1", c.node_type_f1},     {"edge_f1", c.edge_f1},
           {"exact_match", c.exact_match},       {"retrieved_units", c.retrieved_units},
           {"generated_units", c.generated_units}};
}

void to_json(json &j, const EvalReport &r) {
  j = json::object();
  if (r.strategy)
    j["strategy"] = to_string(*r.strategy);
  if (!r.extraction.empty()) {
    j["extraction"] = r.extraction;
    j["mean_node_coverage"] = r.mean_node_coverage();
    j["mean_edge_validity"] = r.mean_edge_validity();
    j["reconstructible_count"] = r.reconstructible_count();
  }
  if (!r.construction.empty()) {
    j["construction"] = r.construction;
    j["mean_node_type_f1"] = r.mean_node_type_f1();
    j["mean_edge_f1"] = r.mean_edge_f1();
    j["exact_match_count"] = r.exact_match_count();
  }
}

} // namespace flowforge
