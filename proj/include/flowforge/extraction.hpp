#pragma once

// Workflow knowledge extraction: partition a workflow into standardized
// segments, each carried in dual form (topology + function description)
// under one content-addressed segment id.

#include "flowforge/ir.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace flowforge {

struct SourceWorkflowRef {
  std::string id;
  std::string name;
  std::string description;

  friend bool operator==(const SourceWorkflowRef &, const SourceWorkflowRef &) = default;
};

struct SegmentGraph {
  std::string segment_id;
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> internal_edges;
  std::vector<ParamSpec> boundary_inputs;  // unsatisfied required inputs of members
  std::vector<ParamSpec> boundary_outputs; // outputs of member sink nodes

  friend bool operator==(const SegmentGraph &, const SegmentGraph &) = default;
};

struct FunctionDescription {
  std::string segment_id;
  std::string segment_name;
  std::string segment_description;
  SourceWorkflowRef source_workflow;

  friend bool operator==(const FunctionDescription &, const FunctionDescription &) = default;
};

struct Segment {
  SegmentGraph graph;
  FunctionDescription description;
  bool synthetic{false};

  friend bool operator==(const Segment &, const Segment &) = default;
};

struct Decomposition {
  std::string workflow_id;
  std::vector<Segment> segments;
  std::vector<EdgeSpec> boundary_edges;
  std::map<NodeId, std::size_t> assignment; // node -> index into segments
};

// Builds a segment graph from member nodes and their internal edges,
// deriving boundary parameters and the content-addressed id.
[[nodiscard]] SegmentGraph make_segment_graph(std::vector<NodeSpec> nodes,
                                              std::vector<EdgeSpec> internal_edges);

// First 16 hex chars of SHA-256 over (sorted ntypes, sorted internal edges as
// ntype pairs with ports, sorted boundary input and output names).
[[nodiscard]] std::string segment_content_id(const SegmentGraph &g);

// Member node ids with no internal successors (or, inside a terminal cycle,
// the cycle's first member); mirrored for sources.
[[nodiscard]] std::vector<NodeId> segment_sinks(const SegmentGraph &g);
[[nodiscard]] std::vector<NodeId> segment_sources(const SegmentGraph &g);

// Members in topological order; cycle members and ties follow list order.
[[nodiscard]] std::vector<const NodeSpec *> topological_members(const SegmentGraph &g);

[[nodiscard]] WorkflowGraph as_workflow(const SegmentGraph &g);

// Throws InvalidSegment unless: nodes non-empty, edges internal, member
// subgraph weakly connected, ids consistent with content.
void validate_segment(const Segment &s);

// Trigger-only segments are kept for coverage but never offered for reuse.
[[nodiscard]] bool is_reusable(const Segment &s) noexcept;

[[nodiscard]] Decomposition decompose_structural(const WorkflowGraph &g);

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

class SemanticAnnotator {
public:
  virtual ~SemanticAnnotator() = default;
  // Returns the segment with name/description filled. Topology and ids must
  // come back unchanged.
  [[nodiscard]] virtual Segment annotate(const Segment &segment) = 0;
};

// name = ntypes joined in topological order,
// description = "Performs: " + node names in topological order.
class StubAnnotator final : public SemanticAnnotator {
public:
  [[nodiscard]] Segment annotate(const Segment &segment) override;
};

[[nodiscard]] Decomposition annotate(Decomposition d, SemanticAnnotator &annotator,
                                     std::size_t max_inflight = 4);

// ---------------------------------------------------------------------------
// Validation against the extraction failure modes
// ---------------------------------------------------------------------------

struct ExtractionReport {
  double node_coverage{0};
  double edge_validity{0};
  bool reconstructible{false};
  std::vector<NodeId> misallocated;
  std::vector<NodeId> omitted;
};

// Re-joins all segments along the boundary edges.
[[nodiscard]] WorkflowGraph stitch(const Decomposition &d);

[[nodiscard]] ExtractionReport validate_decomposition(const WorkflowGraph &g,
                                                      const Decomposition &d);

// ---------------------------------------------------------------------------
// Encodings (segment file format and friends)
// ---------------------------------------------------------------------------

void to_json(nlohmann::json &j, const SegmentGraph &g);
void from_json(const nlohmann::json &j, SegmentGraph &g);
void to_json(nlohmann::json &j, const Segment &s);
void from_json(const nlohmann::json &j, Segment &s);
void to_json(nlohmann::json &j, const Decomposition &d);
void from_json(const nlohmann::json &j, Decomposition &d);
void to_json(nlohmann::json &j, const ExtractionReport &r);

} // namespace flowforge
