#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hapticdrone/evaluation.hpp"
#include "hapticdrone/linkage.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/world.hpp"

namespace hapticdrone::service {

struct LoopOptions {
  sim::SimConfig sim;
  eval::FlightCriteria criteria;
  /// Pace ticks at dt_control of wall-clock time. Never changes the state sequence.
  bool live = false;
  /// Fixed evaluation target; otherwise the instruction is resolved against
  /// ground truth every tick.
  std::optional<std::size_t> target_index;
  /// 0 runs until the criteria timeout.
  std::size_t max_ticks = 0;
  bool stop_on_success = true;
};

struct TickRecord {
  std::uint64_t step = 0;
  Observation observation;  ///< what the policy saw
  ActionVector action;
  Vec3 position_before = Vec3::Zero();
  sim::TrajectorySample sample;
  linkage::DeviceCommand arrays;
};

/// State snapshot streamed to operator consoles once per control tick.
struct ConsoleEvent {
  std::uint64_t tick = 0;  ///< strictly increasing across the session
  std::uint64_t step = 0;  ///< control steps since the last reset
  double sim_time = 0.0;
  DroneState drone;
  std::vector<VirtualObject> objects;
  std::string instruction;
  ActionVector last_action;
  linkage::DeviceCommand arrays;
  std::optional<Vec3> target;
  eval::FlightOutcome outcome;
  bool finished = false;
  bool paused = false;
};

/// One JSON object: {"type":"event", "snapshot":bool, ...}.
std::string encode_event(const ConsoleEvent& e, bool snapshot = false);

/**
 * Frame-by-frame control loop around one world.
 *
 * Each tick renders both frames, queries the policy, derives the two array
 * commands and advances the plant by one control period. Instruction, scene
 * and object changes take effect at the next tick boundary.
 */
class ClosedLoop {
 public:
  ClosedLoop(const sim::SceneConfig& scene, std::string instruction, policy::Policy& policy,
             LoopOptions opts);
  /// Starts from an already spawned world.
  ClosedLoop(sim::WorldState world, std::string instruction, policy::Policy& policy,
             LoopOptions opts);

  /// Propagates policy errors; the loop state is unchanged when one occurs.
  TickRecord tick();
  bool finished() const;

  Observation observe() const;
  ConsoleEvent event() const;

  const sim::WorldState& world() const noexcept { return world_; }
  /// Samples of the current segment, with times relative to its start.
  const sim::Trajectory& trajectory() const noexcept { return segment_; }
  std::optional<Vec3> target_position() const;
  eval::FlightOutcome outcome() const;
  const std::string& instruction() const noexcept { return instruction_; }
  std::uint64_t step() const noexcept { return step_; }
  const LoopOptions& options() const noexcept { return opts_; }

  /// Throws ParseError for out-of-grammar text; starts a new outcome segment.
  void set_instruction(std::string text);
  /// Throws ValidationError; restarts the episode.
  void reset(const sim::SceneConfig& scene);
  /// Throws ValidationError when the object violates the scene invariants.
  void spawn(const VirtualObject& object);

 private:
  std::size_t tick_budget() const;

  policy::Policy& policy_;
  LoopOptions opts_;
  sim::WorldState world_;
  std::string instruction_;
  sim::Trajectory segment_;
  double segment_start_ = 0.0;
  std::uint64_t step_ = 0;
  std::uint64_t segment_steps_ = 0;
  linkage::DeviceCommand arrays_{};
};

struct LoopResult {
  sim::Trajectory trajectory;
  eval::FlightOutcome outcome;
  std::optional<Vec3> target;
  std::vector<ActionVector> actions;
  std::vector<double> tick_compute_ms;  ///< render + act + step per tick
};

using EventSink = std::function<void(const ConsoleEvent&)>;

/// Runs until the flight criteria resolve or the tick budget runs out.
/// Policy errors (including remote protocol errors) abort the loop by
/// propagating.
LoopResult run_closed_loop(const sim::SceneConfig& scene, policy::Policy& policy,
                           const std::string& instruction, const LoopOptions& opts,
                           const EventSink& sink = {});

}  // namespace hapticdrone::service
