#pragma once

// Service configuration, layered: defaults < JSON config file < FLOWFORGE_*
// environment variables < command-line flags.
//
//   data_dir          FLOWFORGE_DATA_DIR          "./flowforge-data"
//   listen_addr       FLOWFORGE_LISTEN_ADDR       "127.0.0.1:8080"
//   llm_endpoint      FLOWFORGE_LLM_ENDPOINT      unset
//   llm_api_key       FLOWFORGE_LLM_API_KEY       unset
//   embed_provider    FLOWFORGE_EMBED_PROVIDER    "deterministic" | "remote"
//   k                 FLOWFORGE_K                 10
//   theta             FLOWFORGE_THETA             0.6
//   max_inflight_llm  FLOWFORGE_MAX_INFLIGHT_LLM  4

#include "flowforge/construction.hpp"
#include "flowforge/extraction.hpp"
#include "flowforge/repository.hpp"
#include "flowforge/requirements.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace flowforge {

enum class EmbedProviderKind { Deterministic, Remote };

struct ListenAddress {
  std::string host;
  std::uint16_t port{0};
};

struct ServiceConfig {
  std::filesystem::path data_dir{"./flowforge-data"};
  std::string listen_addr{"127.0.0.1:8080"};
  std::optional<std::string> llm_endpoint;
  std::optional<std::string> llm_api_key;
  EmbedProviderKind embed_provider{EmbedProviderKind::Deterministic};
  RetrievalConfig retrieval{};
  std::size_t max_inflight_llm{4};

  // Throws InvalidArgument: remote embedding without endpoint and key, an
  // endpoint without a key, bad k/theta, max_inflight_llm of 0, or an
  // unparseable listen address.
  void validate() const;
  [[nodiscard]] ListenAddress listen() const;
  [[nodiscard]] bool uses_remote_models() const noexcept { return llm_endpoint.has_value(); }
};

// Port 0 asks the OS for a free port.
[[nodiscard]] ListenAddress parse_listen_addr(const std::string &s);

// Keys mirror the field names; unknown keys are rejected.
void apply_config_file(ServiceConfig &cfg, const std::filesystem::path &file);
void apply_config_json(ServiceConfig &cfg, const nlohmann::json &j);

using EnvLookup = std::function<std::optional<std::string>(const std::string &)>;
[[nodiscard]] EnvLookup process_env();
void apply_env(ServiceConfig &cfg, const EnvLookup &env);

// Defaults, then the file (if any), then the environment. The result is
// not validated yet so that flags can still be layered on top.
[[nodiscard]] ServiceConfig load_config(const std::optional<std::filesystem::path> &file,
                                        const EnvLookup &env);

// Everything a running service or CLI command needs, built from one config.
struct Engine {
  ServiceConfig config;
  std::unique_ptr<Repository> repository;
  std::unique_ptr<SemanticAnnotator> annotator;
  std::unique_ptr<RequirementAnalyzer> analyzer;
  std::unique_ptr<SegmentGenerator> generator;

  [[nodiscard]] ConstructOptions construct_options() const;
};

// Validates the config and opens the repository under data_dir.
[[nodiscard]] Engine make_engine(const ServiceConfig &cfg);

} // namespace flowforge
