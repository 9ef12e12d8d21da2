#include "flowforge/config.hpp"

#include "flowforge/error.hpp"
#include "flowforge/remote.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

namespace flowforge {

using json = nlohmann::json;

namespace {

EmbedProviderKind parse_provider(const std::string &s) {
  if (s == "deterministic")
    return EmbedProviderKind::Deterministic;
  if (s == "remote")
    return EmbedProviderKind::Remote;
  throw Error(ErrorCode::InvalidArgument, "embed_provider must be deterministic or remote: " + s);
}

template <typename T> T parse_number(const std::string &key, const std::string &s) {
  T value{};
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw Error(ErrorCode::InvalidArgument, key + " is not a number: " + s);
  return value;
}

} // namespace

ListenAddress parse_listen_addr(const std::string &s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
    throw Error(ErrorCode::InvalidArgument, "listen_addr must be host:port: " + s);
  const auto port = parse_number<unsigned>("listen_addr port", s.substr(colon + 1));
  if (port > 65535)
    throw Error(ErrorCode::InvalidArgument, "listen_addr port out of range: " + s);
  return ListenAddress{s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void ServiceConfig::validate() const {
  retrieval.validate();
  if (max_inflight_llm == 0)
    throw Error(ErrorCode::InvalidArgument, "max_inflight_llm must be at least 1");
  if (data_dir.empty())
    throw Error(ErrorCode::InvalidArgument, "data_dir must be set");
  (void)parse_listen_addr(listen_addr);
  const bool endpoint = llm_endpoint && !llm_endpoint->empty();
  const bool key = llm_api_key && !llm_api_key->empty();
  if (embed_provider == EmbedProviderKind::Remote && !(endpoint && key))
    throw Error(ErrorCode::InvalidArgument,
                "embed_provider remote requires llm_endpoint and llm_api_key");
  if (endpoint && !key)
    throw Error(ErrorCode::InvalidArgument, "llm_endpoint requires llm_api_key");
}

ListenAddress ServiceConfig::listen() const { return parse_listen_addr(listen_addr); }

void apply_config_json(ServiceConfig &cfg, const json &j) {
  if (!j.is_object())
    throw Error(ErrorCode::InvalidArgument, "config must be an object");
  for (const auto &[key, value] : j.items()) {
    try {
      if (key == "data_dir")
        cfg.data_dir = value.get<std::string>();
      else if (key == "listen_addr")
        cfg.listen_addr = value.get<std::string>();
      else if (key == "llm_endpoint")
        cfg.llm_endpoint = value.is_null() ? std::nullopt
                                           : std::optional(value.get<std::string>());
      else if (key == "llm_api_key")
        cfg.llm_api_key = value.is_null() ? std::nullopt
                                          : std::optional(value.get<std::string>());
      else if (key == "embed_provider")
        cfg.embed_provider = parse_provider(value.get<std::string>());
      else if (key == "k")
        cfg.retrieval.k = value.get<std::size_t>();
      else if (key == "theta")
        cfg.retrieval.theta = value.get<double>();
      else if (key == "max_inflight_llm")
        cfg.max_inflight_llm = value.get<std::size_t>();
      else
        throw Error(ErrorCode::InvalidArgument, "unknown config key: " + key);
    } catch (const json::exception &e) {
      throw Error(ErrorCode::InvalidArgument, "config key " + key + ": " + e.what());
    }
  }
}

void apply_config_file(ServiceConfig &cfg, const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in)
    throw Error(ErrorCode::InvalidArgument, "cannot read config file: " + file.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::InvalidArgument, "config file is not valid JSON: " + file.string());
  apply_config_json(cfg, j);
}

EnvLookup process_env() {
  return [](const std::string &name) -> std::optional<std::string> {
    if (const char *v = std::getenv(name.c_str()))
      return std::string(v);
    return std::nullopt;
  };
}

void apply_env(ServiceConfig &cfg, const EnvLookup &env) {
  if (auto v = env("FLOWFORGE_DATA_DIR"))
    cfg.data_dir = *v;
  if (auto v = env("FLOWFORGE_LISTEN_ADDR"))
    cfg.listen_addr = *v;
  if (auto v = env("FLOWFORGE_LLM_ENDPOINT"))
    cfg.llm_endpoint = *v;
  if (auto v = env("FLOWFORGE_LLM_API_KEY"))
    cfg.llm_api_key = *v;
  if (auto v = env("FLOWFORGE_EMBED_PROVIDER"))
    cfg.embed_provider = parse_provider(*v);
  if (auto v = env("FLOWFORGE_K"))
    cfg.retrieval.k = parse_number<std::size_t>("FLOWFORGE_K", *v);
  if (auto v = env("FLOWFORGE_THETA"))
    cfg.retrieval.theta = parse_number<double>("FLOWFORGE_THETA", *v);
  if (auto v = env("FLOWFORGE_MAX_INFLIGHT_LLM"))
    cfg.max_inflight_llm = parse_number<std::size_t>("FLOWFORGE_MAX_INFLIGHT_LLM", *v);
}

ServiceConfig load_config(const std::optional<std::filesystem::path> &file, const EnvLookup &env) {
  ServiceConfig cfg;
  if (file)
    apply_config_file(cfg, *file);
  apply_env(cfg, env);
  return cfg;
}

ConstructOptions Engine::construct_options() const {
  ConstructOptions o;
  o.retrieval = config.retrieval;
  o.max_inflight = config.max_inflight_llm;
  return o;
}

Engine make_engine(const ServiceConfig &cfg) {
  cfg.validate();
  Engine e;
  e.config = cfg;

  RemoteClientPtr client;
  if (cfg.uses_remote_models() || cfg.embed_provider == EmbedProviderKind::Remote)
    client = std::make_shared<RemoteClient>(
        RemoteEndpoint{*cfg.llm_endpoint, *cfg.llm_api_key, cfg.max_inflight_llm});

  EmbeddingProviderPtr provider = cfg.embed_provider == EmbedProviderKind::Remote
                                      ? std::make_shared<RemoteEmbeddingProvider>(client)
                                      : make_default_provider();
  e.repository = std::make_unique<Repository>(cfg.data_dir, std::move(provider));
  if (cfg.uses_remote_models()) {
    e.annotator = std::make_unique<RemoteAnnotator>(client);
    e.analyzer = std::make_unique<RemoteAnalyzer>(client);
    e.generator = std::make_unique<RemoteGenerator>(client);
  } else {
    e.annotator = std::make_unique<StubAnnotator>();
    e.analyzer = std::make_unique<StubAnalyzer>();
    e.generator = std::make_unique<StubGenerator>();
  }
  return e;
}

} // namespace flowforge
