#pragma once

// n8n document ingest and emission.
//
// Document model (connections key by node *name*; the outer array index
// under "main" is the source output port, "index" is the target input port):
//
//   {"name": str, "nodes": [{"id", "name", "type", "typeVersion",
//    "position": [x, y], "parameters": {...}}],
//    "connections": {"<source>": {"main": [[{"node", "type", "index"}]]}}}

#include "flowforge/ir.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowforge {

enum class DocFormat { Json, Yaml };

// Format is inferred from the extension (.json / .yml / .yaml);
// anything else throws UnsupportedFormat.
[[nodiscard]] DocFormat format_from_filename(std::string_view filename);

struct SourceDocument {
  std::string filename;
  DocFormat format{DocFormat::Json};
  std::string bytes;

  [[nodiscard]] static SourceDocument from_bytes(std::string filename, std::string bytes);
  [[nodiscard]] static SourceDocument from_file(const std::filesystem::path &path);
};

struct StripEntry {
  NodeId node_id; // empty for workflow-level keys
  std::string key;

  friend bool operator==(const StripEntry &, const StripEntry &) = default;
};

struct StripReport {
  std::vector<StripEntry> removed_keys;
};

struct Position {
  double x{0};
  double y{0};

  friend bool operator==(const Position &, const Position &) = default;
};

using Positions = std::map<NodeId, Position>;

struct ParseResult {
  WorkflowGraph graph;
  StripReport strip;
  Positions positions; // lifted out of the stripped "position" arrays
  std::vector<std::string> warnings;
};

// Layout and cosmetic keys removed from nodes and from the workflow root.
[[nodiscard]] const std::set<std::string, std::less<>> &redundancy_keys();

// Contains "trigger" (case-insensitive), or is one of the n8n entry points
// start, webhook, cron, interval.
[[nodiscard]] bool is_trigger_type(std::string_view ntype);

// Engine-owned node types that n8n documents may carry back in.
inline constexpr std::string_view kConnectorType = "connector.map";
inline constexpr std::string_view kPlaceholderType = "generated.placeholder";
inline constexpr std::string_view kManualTriggerType = "n8n-nodes-base.manualTrigger";

// Decodes JSON, or YAML transcoded to the same object model.
[[nodiscard]] nlohmann::json decode_document(const SourceDocument &doc);

[[nodiscard]] ParseResult parse_n8n(const SourceDocument &doc);

[[nodiscard]] nlohmann::ordered_json emit_n8n_object(const WorkflowGraph &g,
                                                     const Positions &positions);
[[nodiscard]] SourceDocument emit_n8n(const WorkflowGraph &g, const Positions &positions);

struct NodeIo {
  std::vector<ParamSpec> inputs;
  std::vector<ParamSpec> outputs;
};

// Rule-table lookup by longest matching ntype prefix; triggers never have
// inputs; unknown types get a single optional `main: any` port each way.
[[nodiscard]] NodeIo infer_node_io(std::string_view ntype, bool trigger);
[[nodiscard]] NodeIo infer_node_io(const nlohmann::json &n8n_node);

// Content hash over the canonical JSON form of the graph, excluding its
// own workflow_id.
[[nodiscard]] std::string workflow_content_id(const WorkflowGraph &g);

} // namespace flowforge
