#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "hapticdrone/closed_loop.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/policy_server.hpp"

namespace hapticdrone::service {

struct SimServiceOptions {
  /// Wall-clock period per control tick; defaults to dt_control.
  std::chrono::milliseconds tick_period{200};
  bool start_paused = false;
  /// End the session once the flight criteria resolve instead of idling
  /// until a console sends reset or set_instruction.
  bool exit_when_finished = false;
};

/**
 * Live simulator session for operator consoles.
 *
 *   GET /ws          WebSocket: one ConsoleEvent JSON per control tick,
 *                    ConsoleCommand JSON from any client
 *   GET /frame/real  latest real-view PNG
 *   GET /frame/vr    latest VR-view PNG
 *   GET /health      {"status":"ok","tick":N}
 *
 * Commands:
 *   {"cmd":"set_instruction","text":...}  {"cmd":"pause"}  {"cmd":"resume"}
 *   {"cmd":"reset","scene":{...}}         {"cmd":"spawn","object":{...}}
 *
 * One sim thread owns the loop. Commands reach it through an ordered queue
 * and apply at the next tick boundary; events leave it through the network
 * thread, which fans them out. A joining client first receives the latest
 * event flagged "snapshot": true. Rejected commands produce an error
 * message for the sender only.
 */
class SimService {
 public:
  SimService(const sim::SceneConfig& scene, std::string instruction,
             std::shared_ptr<policy::Policy> policy, LoopOptions loop,
             SimServiceOptions opts = {});
  ~SimService();

  SimService(const SimService&) = delete;
  SimService& operator=(const SimService&) = delete;

  /// Binds, then starts the network and sim threads. Returns the bound port.
  /// Throws IoError when the address cannot be bound.
  int start(const BindAddress& addr);
  /// Blocks until the session ends (exit_when_finished) or stop() is called.
  void wait();
  void stop();

  int port() const noexcept;
  std::uint64_t ticks() const;
  /// Trajectory and outcome of the current segment. The per-tick compute
  /// times are filled in; actions are those of the current segment.
  LoopResult result() const;
  /// Set when the policy threw; the session pauses itself.
  std::string last_error() const;

  struct Impl;  // opaque; public only so the network session types can name it

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace hapticdrone::service
