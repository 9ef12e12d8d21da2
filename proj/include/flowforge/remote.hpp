#pragma once

// JSON-over-HTTP adapters for model-backed annotation, analysis, generation
// and embedding. Every call is a POST to <endpoint>/<op> with a bearer key:
//
//   /embed     {"text"}                      -> {"embedding": [number...]}
//   /annotate  {"segment"}                   -> {"name", "description"}
//   /analyze   {"requirement", "context"}    -> {"units": [{"title", "description",
//                                                           "depends_on"?}]}
//   /generate  {"unit"}                      -> {"nodes": [...], "edges": [...]}

#include "flowforge/construction.hpp"
#include "flowforge/embedding.hpp"
#include "flowforge/extraction.hpp"
#include "flowforge/requirements.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

namespace flowforge {

struct RemoteEndpoint {
  std::string url; // http(s)://host[:port][/prefix]
  std::string api_key;
  std::size_t max_inflight{4};
  std::chrono::seconds timeout{30};
};

// Shared by all adapters built from one endpoint so the in-flight bound
// covers every model call together.
class RemoteClient {
public:
  explicit RemoteClient(RemoteEndpoint endpoint);

  // Throws ProviderUnavailable on transport failure, a non-2xx status or a
  // body that is not a JSON object.
  [[nodiscard]] nlohmann::json post(const std::string &op, const nlohmann::json &body) const;

  [[nodiscard]] const RemoteEndpoint &endpoint() const noexcept { return endpoint_; }

private:
  RemoteEndpoint endpoint_;
  std::string origin_;
  std::string prefix_;
  mutable std::counting_semaphore<> slots_;
};

using RemoteClientPtr = std::shared_ptr<RemoteClient>;

class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
  explicit RemoteEmbeddingProvider(RemoteClientPtr client) : client_(std::move(client)) {}
  [[nodiscard]] std::string_view name() const noexcept override { return "remote"; }
  [[nodiscard]] bool deterministic() const noexcept override { return false; }
  [[nodiscard]] std::vector<double> raw_embedding(std::string_view text) override;

private:
  RemoteClientPtr client_;
};

class RemoteAnnotator final : public SemanticAnnotator {
public:
  explicit RemoteAnnotator(RemoteClientPtr client) : client_(std::move(client)) {}
  [[nodiscard]] Segment annotate(const Segment &segment) override;

private:
  RemoteClientPtr client_;
};

class RemoteAnalyzer final : public RequirementAnalyzer {
public:
  explicit RemoteAnalyzer(RemoteClientPtr client) : client_(std::move(client)) {}
  [[nodiscard]] std::vector<UnitDraft>
  analyze(std::string_view requirement, const std::vector<ContextWorkflow> &context) override;

private:
  RemoteClientPtr client_;
};

// Returned nodes get their ports from the bundled rule table when none are
// given; the segment is always marked synthetic.
class RemoteGenerator final : public SegmentGenerator {
public:
  explicit RemoteGenerator(RemoteClientPtr client) : client_(std::move(client)) {}
  [[nodiscard]] Segment generate(const FunctionalUnit &unit) override;

private:
  RemoteClientPtr client_;
};

} // namespace flowforge
