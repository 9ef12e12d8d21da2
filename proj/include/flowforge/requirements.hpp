#pragma once

// Requirement analysis: natural-language requirement -> ordered functional
// units whose descriptions become retrieval queries.

#include "flowforge/repository.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

struct FunctionalUnit {
  std::size_t unit_id{0}; // 1-based ordinal
  std::string title;
  std::string description;
  std::vector<std::size_t> depends_on; // earlier unit_ids only

  friend bool operator==(const FunctionalUnit &, const FunctionalUnit &) = default;
};

struct TaskPlan {
  std::string requirement_text;
  std::vector<FunctionalUnit> units;
  std::vector<std::string> context_workflow_ids;
};

// What an analyzer sees of each reference workflow; never full graphs.
struct ContextWorkflow {
  std::string name;
  std::string description;
  std::vector<std::string> segment_titles;
};

struct UnitDraft {
  std::string title;
  std::string description;
  // nullopt: depend on the previous unit.
  std::optional<std::vector<std::size_t>> depends_on;
};

class RequirementAnalyzer {
public:
  virtual ~RequirementAnalyzer() = default;
  [[nodiscard]] virtual std::vector<UnitDraft>
  analyze(std::string_view requirement, const std::vector<ContextWorkflow> &context) = 0;
};

// Splits on step markers and bullet lines when present, otherwise on
// sentence terminators; units form a chain; context is ignored.
class StubAnalyzer final : public RequirementAnalyzer {
public:
  [[nodiscard]] std::vector<UnitDraft>
  analyze(std::string_view requirement, const std::vector<ContextWorkflow> &context) override;
};

// Pieces the stub analyzer turns into units, trimmed, in order.
[[nodiscard]] std::vector<std::string> split_requirement(std::string_view text);

// First six whitespace-separated words.
[[nodiscard]] std::string unit_title(std::string_view description);

[[nodiscard]] TaskPlan analyze_requirement(std::string_view text, const Repository &repo,
                                           const RetrievalConfig &cfg,
                                           RequirementAnalyzer &analyzer);

} // namespace flowforge
