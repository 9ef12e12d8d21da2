#include "flowforge/platform.hpp"

#include "flowforge/error.hpp"

namespace flowforge {

NodeSpec N8nAdapter::start_node() const {
  NodeSpec n;
  n.node_id = "manual-trigger";
  n.name = "Manual Trigger";
  n.ntype = std::string(kManualTriggerType);
  n.role = NodeRole::Trigger;
  auto io = infer_node_io(n.ntype, true);
  n.inputs = std::move(io.inputs);
  n.outputs = std::move(io.outputs);
  n.raw_config = {{"typeVersion", 1}, {"parameters", nlohmann::json::object()}};
  return n;
}

const PlatformAdapter &adapter_for(std::string_view platform) {
  static const N8nAdapter n8n;
  if (platform == n8n.platform())
    return n8n;
  throw Error(ErrorCode::UnsupportedPlatform,
              "no adapter for platform '" + std::string(platform) + "'");
}

} // namespace flowforge
