#include "flowforge/cli.hpp"

#include <atomic>
#include <csignal>
#include <iostream>

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

} // namespace

int main(int argc, char **argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const flowforge::CliContext ctx{std::cout, std::cerr, flowforge::process_env(), &g_stop};
  return flowforge::run_cli(argc, argv, ctx);
}
