#pragma once

// JSON encodings of the domain types. These are the engine's normalized
// forms (repository files, API bodies), not the n8n platform format.

#include "flowforge/ir.hpp"

#include <nlohmann/json.hpp>

namespace flowforge {

void to_json(nlohmann::json &j, const ParamSpec &p);
void from_json(const nlohmann::json &j, ParamSpec &p);
void to_json(nlohmann::json &j, const NodeSpec &n);
void from_json(const nlohmann::json &j, NodeSpec &n);
void to_json(nlohmann::json &j, const EdgeSpec &e);
void from_json(const nlohmann::json &j, EdgeSpec &e);
void to_json(nlohmann::json &j, const WorkflowGraph &g);
void from_json(const nlohmann::json &j, WorkflowGraph &g);
void to_json(nlohmann::json &j, const Violation &v);

} // namespace flowforge
