#pragma once

// Platform-agnostic workflow graph model and the pure graph operations
// every other module builds on.

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flowforge {

using NodeId = std::string;

enum class ParamType { String, Number, Boolean, Json, Binary, Any };

enum class NodeRole { Trigger, Function, Connector, Terminator };

[[nodiscard]] std::string_view to_string(ParamType t) noexcept;
[[nodiscard]] std::string_view to_string(NodeRole r) noexcept;
[[nodiscard]] std::optional<ParamType> parse_param_type(std::string_view s) noexcept;
[[nodiscard]] std::optional<NodeRole> parse_node_role(std::string_view s) noexcept;

// `any` is compatible with every type; every other type only with itself.
[[nodiscard]] constexpr bool compatible(ParamType a, ParamType b) noexcept {
  return a == ParamType::Any || b == ParamType::Any || a == b;
}

struct ParamSpec {
  std::string name;
  ParamType ptype{ParamType::Any};
  bool required{false};

  friend bool operator==(const ParamSpec &, const ParamSpec &) = default;
  friend auto operator<=>(const ParamSpec &, const ParamSpec &) = default;
};

struct NodeSpec {
  NodeId node_id;
  std::string name;
  std::string ntype;
  NodeRole role{NodeRole::Function};
  std::vector<ParamSpec> inputs;
  std::vector<ParamSpec> outputs;
  // Platform parameters kept for round-trip emission (typeVersion,
  // parameters, ...). Never holds layout or cosmetic keys.
  nlohmann::json raw_config = nlohmann::json::object();

  friend bool operator==(const NodeSpec &, const NodeSpec &) = default;
};

struct EdgeSpec {
  NodeId source;
  std::size_t source_port{0};
  NodeId target;
  std::size_t target_port{0};

  friend bool operator==(const EdgeSpec &, const EdgeSpec &) = default;
  friend auto operator<=>(const EdgeSpec &, const EdgeSpec &) = default;
};

struct WorkflowGraph {
  std::string workflow_id;
  std::string name;
  std::string description;
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;

  [[nodiscard]] const NodeSpec *find(std::string_view id) const noexcept;

  friend bool operator==(const WorkflowGraph &, const WorkflowGraph &) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ViolationKind {
  DanglingEdge,
  DuplicateNodeId,
  DuplicateEdge,
  EmptyNodeId,
  EmptyParamName,
  DuplicateParamName,
};

[[nodiscard]] std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  std::string subject; // offending node id, or edge rendered as text
  std::string detail;

  friend bool operator==(const Violation &, const Violation &) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

[[nodiscard]] ValidationReport validate_graph(const WorkflowGraph &g);

// ---------------------------------------------------------------------------
// Condensation and layering
// ---------------------------------------------------------------------------

struct Condensation {
  // members[c] lists node ids of supernode c in graph order.
  std::vector<std::vector<NodeId>> members;
  // Deduplicated supernode edges, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::unordered_map<NodeId, std::size_t> component_of;

  [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
  [[nodiscard]] std::vector<std::size_t> out_degrees() const;
  [[nodiscard]] std::vector<std::size_t> in_degrees() const;
};

// Strongly connected components (Tarjan). Supernodes are numbered in a
// topological order of the condensation.
[[nodiscard]] Condensation condensed_dag(const WorkflowGraph &g);

// layer(v) = longest path length from any source, computed on the
// condensation; every member of a supernode shares its layer.
[[nodiscard]] std::map<NodeId, std::size_t> longest_path_layers(const WorkflowGraph &g);

// Bijection on nodes preserving ntype, role, I/O parameter multisets and
// every edge (ports included). Names, ids and raw_config are ignored.
[[nodiscard]] bool graphs_isomorphic_modulo_layout(const WorkflowGraph &a,
                                                   const WorkflowGraph &b);

// Nodes reachable from `from` following edge direction (includes `from`).
[[nodiscard]] std::vector<NodeId> reachable_from(const WorkflowGraph &g,
                                                 const NodeId &from);

} // namespace flowforge
