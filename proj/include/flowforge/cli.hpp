#pragma once

#include "flowforge/config.hpp"

#include <atomic>
#include <iosfwd>

namespace flowforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

struct CliContext {
  std::ostream &out;
  std::ostream &err;
  EnvLookup env;
  // `serve` returns once this becomes true; nullptr serves until killed.
  const std::atomic<bool> *stop{nullptr};
};

// Subcommands: ingest, decompose, segments list|show, query, construct,
// export, eval, serve. Returns 0 on success, 1 on a domain error and 2 on a
// usage error.
int run_cli(int argc, const char *const *argv, const CliContext &ctx);

} // namespace flowforge
