#include "hapticdrone/flight_suite.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "hapticdrone/closed_loop.hpp"
#include "hapticdrone/errors.hpp"
#include "hapticdrone/rng.hpp"
#include "json_io.hpp"

namespace hapticdrone::eval {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const FlightSummary& s) {
  return {{"total", s.total},
          {"successes", s.successes},
          {"partials", s.partials},
          {"fails", s.fails},
          {"success_rate", s.success_rate},
          {"reach_time_mean", optional_json(s.reach_time_mean)},
          {"reach_time_min", optional_json(s.reach_time_min)},
          {"reach_time_max", optional_json(s.reach_time_max)},
          {"pose_error_flights", s.pose_error_flights},
          {"pose_error_mean", optional_json(s.pose_error_mean)},
          {"pose_error_stderr", optional_json(s.pose_error_stderr)},
          {"text", format_summary(s)}};
}

std::string csv_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

std::string summary_row(const std::string& label, const FlightSummary& s) {
  return fmt::format("{},{},{},{},{},{:.6f},{},{},{},{},{}\n", label, s.total, s.successes,
                     s.partials, s.fails, s.success_rate, csv_opt(s.reach_time_mean),
                     csv_opt(s.reach_time_min), csv_opt(s.reach_time_max),
                     csv_opt(s.pose_error_mean), csv_opt(s.pose_error_stderr));
}

service::LoopOptions loop_options(const SuiteConfig& cfg, std::uint64_t seed,
                                  std::size_t target_index) {
  service::LoopOptions opts;
  opts.sim = cfg.sim;
  opts.sim.seed = seed;
  opts.criteria = cfg.criteria;
  opts.target_index = target_index;
  return opts;
}

// Index the selector picks with the drone at its start; nullopt if none.
std::optional<std::size_t> resolved_index(const GeneralizationCase& c) {
  try {
    const auto sel = policy::parse_instruction(c.instruction);
    sim::WorldState probe;
    probe.drone.position = c.scene.drone_start;
    probe.objects = c.scene.objects;
    return policy::resolve_target(sel, probe);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool selects_by_texture(const std::string& instruction) {
  try {
    const auto sel = policy::parse_instruction(instruction);
    if (std::holds_alternative<policy::ByTexture>(sel)) return true;
    if (const auto* f = std::get_if<policy::Follow>(&sel)) {
      return std::holds_alternative<policy::ByTexture>(f->inner);
    }
  } catch (const Error&) {
  }
  return false;
}

Texture next_texture(Texture t, int step) {
  return texture_from_code(static_cast<std::uint8_t>((code(t) + step) % 3));
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, std::size_t pose_index, std::size_t trial) {
  return mix_seed(base, (static_cast<std::uint64_t>(pose_index) << 32) | trial);
}

Vec3 trial_start(const SuiteConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Vec3 s = cfg.start_center;
  s.x() += rng.uniform(-cfg.start_jitter, cfg.start_jitter);
  s.y() += rng.uniform(-cfg.start_jitter, cfg.start_jitter);
  return s;
}

FlightSuiteReport run_flight_suite(policy::Policy& policy, const std::vector<Vec3>& poses,
                                   std::size_t trials_per_pose, const SuiteConfig& cfg) {
  if (poses.empty()) throw InputError("flight suite needs at least one pose");
  if (trials_per_pose == 0) throw InputError("trials per pose must be >= 1");
  cfg.criteria.validate();
  for (const auto& p : poses) {
    if (!cfg.sim.bounds.contains(p)) {
      throw InputError(fmt::format("pose ({}, {}, {}) is outside the world bounds", p.x(), p.y(),
                                   p.z()));
    }
  }

  FlightSuiteReport report;
  report.policy = policy.name();
  report.criteria = cfg.criteria;
  std::vector<FlightOutcome> all;
  for (std::size_t pi = 0; pi < poses.size(); ++pi) {
    std::vector<FlightOutcome> per_pose;
    for (std::size_t k = 0; k < trials_per_pose; ++k) {
      TrialRecord t;
      t.pose_index = pi;
      t.trial = k;
      t.seed = trial_seed(cfg.seed, pi, k);
      t.start = trial_start(cfg, t.seed);
      t.target = poses[pi];
      t.instruction = cfg.instruction;
      sim::SceneConfig scene;
      scene.drone_start = t.start;
      scene.objects.push_back({cfg.target_shape, cfg.target_texture, t.target, cfg.target_size});
      policy.reset();
      try {
        auto res = service::run_closed_loop(scene, policy, t.instruction,
                                            loop_options(cfg, t.seed, 0));
        t.outcome = res.outcome;
        t.trajectory = std::move(res.trajectory);
      } catch (const std::exception& e) {
        t.outcome = {};
        t.failure = e.what();
      }
      per_pose.push_back(t.outcome);
      all.push_back(t.outcome);
      report.trials.push_back(std::move(t));
    }
    report.per_pose.push_back({poses[pi], flight_metrics(per_pose)});
  }
  report.overall = flight_metrics(all);
  return report;
}

std::string suite_report_json(const FlightSuiteReport& r) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"pose_index", t.pose_index},
                      {"trial", t.trial},
                      {"seed", t.seed},
                      {"start", json_io::vec(t.start)},
                      {"target", json_io::vec(t.target)},
                      {"instruction", t.instruction},
                      {"outcome", to_string(t.outcome.outcome)},
                      {"reach_time", optional_json(t.outcome.reach_time)},
                      {"samples", t.trajectory.size()},
                      {"failure", t.failure ? json(*t.failure) : json(nullptr)}});
  }
  json poses = json::array();
  for (const auto& p : r.per_pose) {
    poses.push_back({{"pose", json_io::vec(p.pose)}, {"summary", summary_json(p.summary)}});
  }
  return json{{"policy", r.policy},
              {"criteria",
               {{"success_radius", r.criteria.success_radius},
                {"hover_duration", r.criteria.hover_duration},
                {"timeout", r.criteria.timeout}}},
              {"reference",
               {{"success_rate", 0.567},
                {"reach_time_mean", 21.3},
                {"reach_time_min", 11.9},
                {"reach_time_max", 35.7},
                {"pose_error_mean", 0.24},
                {"pose_error_stderr", 0.08}}},
              {"overall", summary_json(r.overall)},
              {"per_pose", poses},
              {"trials", trials}}
      .dump(2);
}

std::string suite_summary_csv(const FlightSuiteReport& r) {
  std::string out =
      "pose,trials,successes,partials,fails,success_rate,reach_time_mean,reach_time_min,"
      "reach_time_max,pose_error_mean,pose_error_stderr\n";
  for (const auto& p : r.per_pose) {
    out += summary_row(fmt::format("\"[{}, {}, {}]\"", p.pose.x(), p.pose.y(), p.pose.z()),
                       p.summary);
  }
  out += summary_row("overall", r.overall);
  return out;
}

std::string trajectories_csv(const FlightSuiteReport& r) {
  std::string out = "pose,trial,t,x,y,outcome\n";
  for (const auto& t : r.trials) {
    const auto cls = to_string(t.outcome.outcome);
    for (const auto& s : t.trajectory) {
      out += fmt::format("{},{},{:.2f},{:.6f},{:.6f},{}\n", t.pose_index, t.trial, s.sim_time,
                         s.position.x(), s.position.y(), cls);
    }
  }
  return out;
}

std::string_view to_string(Axis a) noexcept {
  switch (a) {
    case Axis::Visual: return "visual";
    case Axis::Motion: return "motion";
    case Axis::Physical: return "physical";
    case Axis::Semantic: return "semantic";
  }
  return "visual";
}

Axis axis_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Axis a : kAllAxes) {
    if (lower == to_string(a)) return a;
  }
  throw ParseError("unknown generalization axis '" + std::string(name) +
                   "' (expected visual, motion, physical or semantic)");
}

double reference_rate(Axis a) noexcept {
  switch (a) {
    case Axis::Visual: return 70.0;
    case Axis::Motion: return 54.4;
    case Axis::Physical: return 40.0;
    case Axis::Semantic: return 35.0;
  }
  return 0.0;
}

GeneralizationCase perturb_physical(const GeneralizationCase& base, double size_factor,
                                    bool swap_texture) {
  GeneralizationCase c = base;
  auto& target = c.scene.objects.at(c.target_index);
  target.size *= size_factor;
  if (swap_texture) target.texture = next_texture(target.texture, 1);
  return c;
}

GeneralizationCase perturb_scene(Axis axis, const GeneralizationCase& base, std::uint64_t seed,
                                 const sim::WorldBounds& bounds) {
  if (base.target_index >= base.scene.objects.size()) {
    throw InputError("generalization case target index is out of range");
  }
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(axis)));
  GeneralizationCase c = base;
  const VirtualObject target = base.scene.objects[base.target_index];
  const bool by_texture = selects_by_texture(base.instruction);

  switch (axis) {
    case Axis::Visual: {
      c.scene.background =
          rng.below(2) == 0 ? sim::BackgroundStyle::AltColor : sim::BackgroundStyle::Cluttered;
      for (std::size_t i = 0; i < c.scene.objects.size(); ++i) {
        if (i == c.target_index) continue;
        auto& o = c.scene.objects[i];
        Texture t = next_texture(o.texture, 1);
        if (t == target.texture) t = next_texture(o.texture, 2);
        o.texture = t;
      }
      break;
    }
    case Axis::Motion: {
      const std::size_t want = 1 + rng.below(2);
      std::size_t placed = 0;
      for (int attempt = 0; attempt < 1000 && placed < want; ++attempt) {
        VirtualObject d;
        d.shape = shape_from_code(static_cast<std::uint8_t>((code(target.shape) + 1 + rng.below(2)) % 3));
        d.texture = texture_from_code(static_cast<std::uint8_t>(rng.below(3)));
        if (by_texture && d.texture == target.texture) d.texture = next_texture(d.texture, 1);
        d.size = target.size;
        const double mx = 0.3;
        d.position = {rng.uniform(bounds.min.x() + mx, bounds.max.x() - mx),
                      rng.uniform(bounds.min.y() + mx, bounds.max.y() - mx), target.position.z()};
        if ((d.position - target.position).norm() < 1.0) continue;
        if ((d.position - c.scene.drone_start).norm() < 0.5) continue;
        bool crowded = false;
        for (const auto& o : c.scene.objects) crowded |= (d.position - o.position).norm() < 0.5;
        if (crowded) continue;
        GeneralizationCase trial = c;
        trial.scene.objects.push_back(d);
        if (resolved_index(trial) != c.target_index) continue;
        c = std::move(trial);
        ++placed;
      }
      break;
    }
    case Axis::Physical: {
      const double factor = rng.uniform(0.5, 2.0);
      const auto mode = by_texture ? 0 : rng.below(3);  // 0 size, 1 texture, 2 both
      c = perturb_physical(base, mode == 1 ? 1.0 : factor, mode != 0);
      break;
    }
    case Axis::Semantic: {
      std::vector<std::string> options;
      for (auto side : {policy::Side::Left, policy::Side::Right}) {
        GeneralizationCase trial = c;
        trial.instruction = policy::instruction_for(policy::Relative{side});
        if (resolved_index(trial) == c.target_index) options.push_back(trial.instruction);
      }
      GeneralizationCase follow = c;
      follow.instruction = policy::instruction_for(policy::Follow{policy::ByShape{target.shape}});
      if (resolved_index(follow) == c.target_index) options.push_back(follow.instruction);
      if (options.empty()) {
        follow.instruction =
            policy::instruction_for(policy::Follow{policy::ByTexture{target.texture}});
        options.push_back(follow.instruction);
      }
      c.instruction = options[rng.below(options.size())];
      break;
    }
  }
  return c;
}

GeneralizationCase base_case(const SuiteConfig& cfg, std::size_t k) {
  const std::size_t pose = k % kReferenceTargets.size();
  GeneralizationCase c;
  c.scene.drone_start = trial_start(cfg, trial_seed(cfg.seed, pose, k));
  c.scene.objects.push_back(
      {cfg.target_shape, cfg.target_texture, kReferenceTargets[pose], cfg.target_size});
  c.instruction = cfg.instruction;
  c.target_index = 0;
  return c;
}

CaseResult run_case(policy::Policy& policy, const GeneralizationCase& c, const SuiteConfig& cfg,
                    std::uint64_t seed) {
  CaseResult r{c, {}, std::nullopt};
  policy.reset();
  try {
    r.outcome = service::run_closed_loop(c.scene, policy, c.instruction,
                                         loop_options(cfg, seed, c.target_index))
                    .outcome;
  } catch (const std::exception& e) {
    r.outcome = {};
    r.failure = e.what();
  }
  return r;
}

GeneralizationReport run_generalization(policy::Policy& policy, const std::vector<Axis>& axes,
                                        std::size_t trials_per_axis, const SuiteConfig& cfg) {
  if (trials_per_axis == 0) throw InputError("trials per axis must be >= 1");
  GeneralizationReport report;
  report.policy = policy.name();
  report.trials_per_axis = trials_per_axis;

  std::size_t base_successes = 0;
  for (std::size_t k = 0; k < trials_per_axis; ++k) {
    const auto r = run_case(policy, base_case(cfg, k), cfg, trial_seed(cfg.seed, 99, k));
    base_successes += r.outcome.outcome == OutcomeClass::Success;
  }
  report.base_rate = static_cast<double>(base_successes) / static_cast<double>(trials_per_axis);

  for (Axis axis : axes) {
    AxisReport ar;
    ar.axis = axis;
    ar.trials = trials_per_axis;
    ar.reference_rate = reference_rate(axis);
    for (std::size_t k = 0; k < trials_per_axis; ++k) {
      const auto c = perturb_scene(axis, base_case(cfg, k), trial_seed(cfg.seed, 100, k),
                                   cfg.sim.bounds);
      auto r = run_case(policy, c, cfg, trial_seed(cfg.seed, 99, k));
      ar.successes += r.outcome.outcome == OutcomeClass::Success;
      ar.cases.push_back(std::move(r));
    }
    ar.success_rate = static_cast<double>(ar.successes) / static_cast<double>(ar.trials);
    report.axes.push_back(std::move(ar));
  }
  return report;
}

std::string generalization_report_json(const GeneralizationReport& r) {
  json axes = json::array();
  for (const auto& a : r.axes) {
    json cases = json::array();
    for (const auto& c : a.cases) {
      cases.push_back({{"instruction", c.c.instruction},
                       {"scene", json_io::scene_to_json(c.c.scene)},
                       {"target_index", c.c.target_index},
                       {"outcome", to_string(c.outcome.outcome)},
                       {"reach_time", optional_json(c.outcome.reach_time)},
                       {"failure", c.failure ? json(*c.failure) : json(nullptr)}});
    }
    axes.push_back({{"axis", to_string(a.axis)},
                    {"trials", a.trials},
                    {"successes", a.successes},
                    {"success_rate", a.success_rate},
                    {"reference_rate_percent", a.reference_rate},
                    {"cases", cases}});
  }
  return json{{"policy", r.policy},
              {"trials_per_axis", r.trials_per_axis},
              {"base_rate", r.base_rate},
              {"axes", axes}}
      .dump(2);
}

std::string generalization_csv(const GeneralizationReport& r) {
  std::string out = "axis,trials,successes,success_rate_percent,reference_rate_percent\n";
  out += fmt::format("base,{},{},{:.1f},\n", r.trials_per_axis,
                     static_cast<std::size_t>(std::lround(r.base_rate * r.trials_per_axis)),
                     100.0 * r.base_rate);
  for (const auto& a : r.axes) {
    out += fmt::format("{},{},{},{:.1f},{:.1f}\n", to_string(a.axis), a.trials, a.successes,
                       100.0 * a.success_rate, a.reference_rate);
  }
  return out;
}

}  // namespace hapticdrone::eval
