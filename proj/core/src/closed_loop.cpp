#include "hapticdrone/closed_loop.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/render.hpp"
#include "json_io.hpp"

namespace hapticdrone::service {

using nlohmann::json;

namespace {

json array_json(const linkage::ArrayCommand& a) {
  return {{"extensions", a.extensions},
          {"vibration", to_string(a.vibration)},
          {"vibration_phase", a.vibration_phase}};
}

}  // namespace

std::string encode_event(const ConsoleEvent& e, bool snapshot) {
  json objects = json::array();
  for (const auto& o : e.objects) objects.push_back(json_io::object_to_json(o));
  json outcome = {{"class", eval::to_string(e.outcome.outcome)}};
  outcome["reach_time"] = e.outcome.reach_time ? json(*e.outcome.reach_time) : json(nullptr);
  const auto action = action_to_list(e.last_action);
  return json{{"type", "event"},
              {"snapshot", snapshot},
              {"tick", e.tick},
              {"step", e.step},
              {"sim_time", e.sim_time},
              {"drone",
               {{"position", json_io::vec(e.drone.position)},
                {"velocity", json_io::vec(e.drone.velocity)}}},
              {"objects", objects},
              {"instruction", e.instruction},
              {"last_action", action},
              {"arrays", json::array({array_json(e.arrays.first), array_json(e.arrays.second)})},
              {"target", e.target ? json_io::vec(*e.target) : json(nullptr)},
              {"outcome", outcome},
              {"finished", e.finished},
              {"paused", e.paused}}
      .dump();
}

ClosedLoop::ClosedLoop(const sim::SceneConfig& scene, std::string instruction,
                       policy::Policy& policy, LoopOptions opts)
    : ClosedLoop(sim::spawn(scene, opts.sim), std::move(instruction), policy, opts) {}

ClosedLoop::ClosedLoop(sim::WorldState world, std::string instruction, policy::Policy& policy,
                       LoopOptions opts)
    : policy_(policy), opts_(std::move(opts)), world_(std::move(world)),
      instruction_(std::move(instruction)) {
  opts_.sim.validate();
  opts_.criteria.validate();
  if (instruction_.empty()) throw InputError("instruction must be non-empty");
  if (opts_.target_index && *opts_.target_index >= world_.objects.size()) {
    throw InputError("target index is out of range for the scene");
  }
}

std::size_t ClosedLoop::tick_budget() const {
  if (opts_.max_ticks > 0) return opts_.max_ticks;
  return static_cast<std::size_t>(
      std::floor(opts_.criteria.timeout / opts_.sim.dt_control + 1e-9));
}

Observation ClosedLoop::observe() const {
  Observation obs;
  obs.real_frame = sim::render_topdown(world_, sim::FrameView::Real);
  obs.vr_frame = sim::render_topdown(world_, sim::FrameView::VR);
  obs.instruction = instruction_;
  obs.step_index = step_;
  return obs;
}

std::optional<Vec3> ClosedLoop::target_position() const {
  if (opts_.target_index) return world_.objects[*opts_.target_index].position;
  try {
    const auto sel = policy::parse_instruction(instruction_);
    return world_.objects[policy::resolve_target(sel, world_)].position;
  } catch (const Error&) {
    return std::nullopt;
  }
}

eval::FlightOutcome ClosedLoop::outcome() const {
  const auto target = target_position();
  if (segment_.empty() || !target) return {};
  return eval::classify_flight(segment_, *target, opts_.criteria);
}

bool ClosedLoop::finished() const {
  if (segment_steps_ >= tick_budget()) return true;
  return opts_.stop_on_success && outcome().outcome == eval::OutcomeClass::Success;
}

TickRecord ClosedLoop::tick() {
  TickRecord rec;
  rec.step = step_;
  rec.observation = observe();
  rec.position_before = world_.drone.position;
  rec.action = policy_.act(rec.observation, &world_);

  std::optional<linkage::Contact> contact;
  if (const auto c = sim::contact_query(world_); c && c->in_contact) {
    const auto& o = world_.objects[c->object_index];
    contact = linkage::Contact{o.shape, o.texture};
  }
  rec.arrays = linkage::haptic_to_array_commands(linkage::HapticInput::from_action(rec.action),
                                                 contact, world_.sim_time);

  auto [next, sample] = sim::step_control(world_, rec.action, opts_.sim);
  world_ = std::move(next);
  rec.sample = sample;
  segment_.push_back({sample.sim_time - segment_start_, sample.position});
  arrays_ = rec.arrays;
  ++step_;
  ++segment_steps_;
  return rec;
}

ConsoleEvent ClosedLoop::event() const {
  ConsoleEvent e;
  e.step = step_;
  e.sim_time = world_.sim_time;
  e.drone = world_.drone;
  e.objects = world_.objects;
  e.instruction = instruction_;
  e.last_action = world_.last_action;
  e.arrays = arrays_;
  e.target = target_position();
  e.outcome = outcome();
  e.finished = finished();
  return e;
}

void ClosedLoop::set_instruction(std::string text) {
  (void)policy::parse_instruction(text);
  instruction_ = std::move(text);
  segment_.clear();
  segment_start_ = world_.sim_time;
  segment_steps_ = 0;
  policy_.reset();
}

void ClosedLoop::reset(const sim::SceneConfig& scene) {
  world_ = sim::spawn(scene, opts_.sim);
  if (opts_.target_index && *opts_.target_index >= world_.objects.size()) opts_.target_index.reset();
  segment_.clear();
  segment_start_ = 0.0;
  step_ = 0;
  segment_steps_ = 0;
  arrays_ = {};
  policy_.reset();
}

void ClosedLoop::spawn(const VirtualObject& object) {
  sim::SceneConfig probe;
  probe.drone_start = world_.drone.position;
  probe.objects = {object};
  auto problems = sim::scene_violations(probe, opts_.sim.bounds);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  world_.objects.push_back(object);
}

LoopResult run_closed_loop(const sim::SceneConfig& scene, policy::Policy& policy,
                           const std::string& instruction, const LoopOptions& opts,
                           const EventSink& sink) {
  using clock = std::chrono::steady_clock;
  ClosedLoop loop(scene, instruction, policy, opts);
  LoopResult result;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(opts.sim.dt_control));
  auto deadline = clock::now();
  std::uint64_t tick = 0;
  while (!loop.finished()) {
    const auto begin = clock::now();
    const auto rec = loop.tick();
    result.tick_compute_ms.push_back(
        std::chrono::duration<double, std::milli>(clock::now() - begin).count());
    result.actions.push_back(rec.action);
    if (sink) {
      auto e = loop.event();
      e.tick = ++tick;
      sink(e);
    }
    if (opts.live) {
      deadline += period;
      std::this_thread::sleep_until(deadline);
    }
  }
  result.trajectory = loop.trajectory();
  result.outcome = loop.outcome();
  result.target = loop.target_position();
  return result;
}

}  // namespace hapticdrone::service
