#pragma once

#include "flowforge/n8n.hpp"

#include <memory>
#include <optional>
#include <string_view>

namespace flowforge {

// Per-platform parse/emit pair plus the artifacts platform adaptation
// injects. Only n8n is implemented; Dify and others would slot in here.
class PlatformAdapter {
public:
  virtual ~PlatformAdapter() = default;

  [[nodiscard]] virtual std::string_view platform() const noexcept = 0;
  [[nodiscard]] virtual ParseResult parse(const SourceDocument &doc) const = 0;
  [[nodiscard]] virtual SourceDocument emit(const WorkflowGraph &g,
                                            const Positions &positions) const = 0;
  [[nodiscard]] virtual NodeSpec start_node() const = 0;
  // Platforms without an end-node concept return nullopt.
  [[nodiscard]] virtual std::optional<NodeSpec> terminator_node() const { return std::nullopt; }
};

class N8nAdapter final : public PlatformAdapter {
public:
  [[nodiscard]] std::string_view platform() const noexcept override { return "n8n"; }
  [[nodiscard]] ParseResult parse(const SourceDocument &doc) const override {
    return parse_n8n(doc);
  }
  [[nodiscard]] SourceDocument emit(const WorkflowGraph &g,
                                    const Positions &positions) const override {
    return emit_n8n(g, positions);
  }
  [[nodiscard]] NodeSpec start_node() const override;
};

// Throws UnsupportedPlatform for anything but "n8n".
[[nodiscard]] const PlatformAdapter &adapter_for(std::string_view platform);

} // namespace flowforge
