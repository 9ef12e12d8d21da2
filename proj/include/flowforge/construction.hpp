#pragma once

// Workflow construction: per-unit retrieval with a threshold-gated
// generative fallback, parameter compatibility between adjacent segments,
// connector insertion, assembly, and platform adaptation.

#include "flowforge/extraction.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/repository.hpp"
#include "flowforge/requirements.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

enum class Route { Retrieved, Generated };

[[nodiscard]] std::string_view to_string(Route r) noexcept;

struct UnitResolution {
  std::size_t unit_id{0};
  Route route{Route::Generated};
  Segment segment;
  std::optional<double> score; // set iff retrieved
};

class SegmentGenerator {
public:
  virtual ~SegmentGenerator() = default;
  [[nodiscard]] virtual Segment generate(const FunctionalUnit &unit) = 0;
};

// One `generated.placeholder` node named after the unit title, with a
// single optional `main: any` port each way.
class StubGenerator final : public SegmentGenerator {
public:
  [[nodiscard]] Segment generate(const FunctionalUnit &unit) override;
};

[[nodiscard]] UnitResolution resolve_unit(const FunctionalUnit &unit, const Repository &repo,
                                          const RetrievalConfig &cfg, SegmentGenerator &gen);

// Generative route only; what the zero-shot baseline uses for every unit.
[[nodiscard]] UnitResolution generate_unit(const FunctionalUnit &unit, SegmentGenerator &gen);

struct Binding {
  ParamSpec output;
  ParamSpec input;
  bool by_name{true}; // false: unique type-compatible fallback
};

struct CompatReport {
  std::vector<Binding> satisfied;
  std::vector<ParamSpec> unsatisfied;
  bool needs_connector{false};
};

// For each required downstream boundary input, in order: (1) case-insensitive
// name match with a compatible type, (2) the unique type-compatible upstream
// output, (3) unsatisfied.
[[nodiscard]] CompatReport check_compatibility(const SegmentGraph &upstream,
                                               const SegmentGraph &downstream);

struct Assembly {
  WorkflowGraph graph;
  std::size_t connectors_inserted{0};
};

// Node ids are re-minted as "<id>@u<unit_id>"; names are made unique.
[[nodiscard]] Assembly assemble(const TaskPlan &plan,
                                const std::vector<UnitResolution> &resolutions);

struct AdaptedWorkflow {
  WorkflowGraph graph; // input plus the injected start node
  Positions positions;
  SourceDocument document;
};

inline constexpr double kLayerSpacingX = 280.0;
inline constexpr double kRowSpacingY = 160.0;

// Layered canvas positions: x = 280 * layer, y = 160 * rank within layer
// (ranked by node id).
[[nodiscard]] Positions layered_positions(const WorkflowGraph &g);

[[nodiscard]] AdaptedWorkflow adapt_platform(const WorkflowGraph &g, std::string_view platform);

struct ConstructOptions {
  RetrievalConfig retrieval{};
  std::size_t max_inflight{4};
  bool force_generative{false}; // zero-shot baseline: skip retrieval
  std::string platform{"n8n"};
};

struct ConstructionResult {
  TaskPlan plan;
  std::vector<UnitResolution> resolutions;
  WorkflowGraph graph; // adapted graph, start node included
  std::size_t connectors_inserted{0};
  SourceDocument deploy_doc;
};

[[nodiscard]] ConstructionResult construct(std::string_view requirement, const Repository &repo,
                                           const ConstructOptions &options,
                                           RequirementAnalyzer &analyzer, SegmentGenerator &gen);

void to_json(nlohmann::json &j, const FunctionalUnit &u);
void to_json(nlohmann::json &j, const TaskPlan &p);
void to_json(nlohmann::json &j, const UnitResolution &r);
void to_json(nlohmann::json &j, const ConstructionResult &r);

} // namespace flowforge
