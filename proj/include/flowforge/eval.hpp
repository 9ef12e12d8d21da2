#pragma once

// Deterministic evaluation harness over a directory of workflow documents.
// The construction scores are graph-similarity proxies: multiset F1 over
// node types and typed edges, plus isomorphism of the core graphs.

#include "flowforge/construction.hpp"
#include "flowforge/extraction.hpp"
#include "flowforge/ir.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

enum class Strategy { RetrievalAugmented, ZeroShotGenerative };

[[nodiscard]] std::string_view to_string(Strategy s) noexcept;
[[nodiscard]] std::optional<Strategy> parse_strategy(std::string_view s) noexcept;

struct CorpusEntry {
  std::string source; // file name within the corpus directory
  WorkflowGraph graph;
  // decompositions/<stem>.json, used instead of decompose_structural.
  std::optional<Decomposition> decomposition;
};

// Reads *.json, *.yml and *.yaml (non-recursive), sorted by file name.
// Throws CorpusError for a missing or empty directory or an unparseable file.
[[nodiscard]] std::vector<CorpusEntry> load_corpus(const std::filesystem::path &dir);

struct ExtractionCase {
  std::string workflow_id;
  std::string source;
  double node_coverage{0};
  double edge_validity{0};
  bool reconstructible{false};
  std::vector<NodeId> misallocated;
  std::vector<NodeId> omitted;

  [[nodiscard]] bool flagged() const noexcept;
};

struct ConstructionCase {
  std::string workflow_id;
  std::string source;
  double node_type_f1{0};
  double edge_f1{0};
  bool exact_match{false};
  std::size_t retrieved_units{0};
  std::size_t generated_units{0};
};

struct EvalReport {
  std::optional<Strategy> strategy; // set for construction runs
  std::vector<ExtractionCase> extraction;
  std::vector<ConstructionCase> construction;

  [[nodiscard]] double mean_node_coverage() const noexcept;
  [[nodiscard]] double mean_edge_validity() const noexcept;
  [[nodiscard]] std::size_t reconstructible_count() const noexcept;
  [[nodiscard]] double mean_node_type_f1() const noexcept;
  [[nodiscard]] double mean_edge_f1() const noexcept;
  [[nodiscard]] std::size_t exact_match_count() const noexcept;
};

struct EvalOptions {
  // Seed a fresh repository from each workflow alone instead of one
  // repository seeded from the whole corpus.
  bool isolated_seeding{false};
  std::size_t max_inflight{4};
  RetrievalConfig retrieval{};
};

[[nodiscard]] EvalReport eval_extraction(const std::vector<CorpusEntry> &corpus);
[[nodiscard]] EvalReport eval_extraction(const std::filesystem::path &dir);

[[nodiscard]] EvalReport eval_construction(const std::vector<CorpusEntry> &corpus,
                                           Strategy strategy, const EvalOptions &options = {});
[[nodiscard]] EvalReport eval_construction(const std::filesystem::path &dir, Strategy strategy,
                                           const EvalOptions &options = {});

// Triggers removed; connector nodes contracted so each predecessor links
// straight to each successor (ports kept).
[[nodiscard]] WorkflowGraph core_graph(const WorkflowGraph &g);

// F1 of two multisets; 1 when both are empty, 0 when nothing matches.
[[nodiscard]] double multiset_f1(std::vector<std::string> predicted,
                                 std::vector<std::string> reference);

struct GraphScore {
  double node_type_f1{0};
  double edge_f1{0};
  bool exact_match{false};
};

// Both graphs are reduced with core_graph before scoring.
[[nodiscard]] GraphScore score_graph(const WorkflowGraph &constructed,
                                     const WorkflowGraph &original);

// Plain-text table, one row per workflow id, columns: workflow_id,
// node_coverage, edge_validity, reconstructible, node_type_f1, edge_f1,
// exact_match. Missing cells print as "-".
[[nodiscard]] std::string render_table(const EvalReport &extraction,
                                       const EvalReport &construction);

void to_json(nlohmann::json &j, const ExtractionCase &c);
void to_json(nlohmann::json &j, const ConstructionCase &c);
void to_json(nlohmann::json &j, const EvalReport &r);

} // namespace flowforge
