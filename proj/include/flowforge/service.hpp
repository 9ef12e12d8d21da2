#pragma once

// HTTP/JSON service over an Engine.
//
//   GET  /health                      {status, segment_count}
//   POST /workflows                   multipart "file" or raw body (?filename=,
//                                     ?extract=false) -> 201 created | 200 already_present
//   GET  /workflows                   {workflows: [...]}
//   GET  /workflows/{id}              workflow graph + segment_ids
//   POST /workflows/{id}/decompose    {decomposition, report}
//   GET  /segments                    {segments: [...]}
//   GET  /segments/{id}               segment file format
//   PUT  /segments/{id}               {name?, description?, graph?} (?validate_only=true)
//   POST /segments                    segment body -> 201 {segment_id}
//   POST /construct                   {requirement, k?, theta?} -> construction result
//   POST /export                      {workflow_id, platform} -> platform document
//
// Errors are {"error": {"code", "message"}} with the status from
// http_status().

#include "flowforge/config.hpp"
#include "flowforge/error.hpp"

#include <cstdint>
#include <functional>
#include <memory>

namespace flowforge {

// 404 NotFound, 502 for unavailable or misbehaving model backends, 500 for
// storage and bind failures, 400 otherwise.
[[nodiscard]] int http_status(ErrorCode code) noexcept;

class Service {
public:
  explicit Service(Engine &engine);
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  // Port 0 binds a free port. Returns the bound port; throws BindFailure.
  std::uint16_t bind(const ListenAddress &addr);
  // Serves until stop(); requires a prior bind().
  void run();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Builds the engine, binds, reports the port, and serves until `should_stop`
// (polled) returns true.
void serve(const ServiceConfig &cfg, const std::function<void(std::uint16_t)> &on_ready,
           const std::function<bool()> &should_stop);

} // namespace flowforge
