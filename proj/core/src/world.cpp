#include "hapticdrone/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::sim {

namespace {

std::string fmt_vec(const Vec3& v) {
  return "(" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " +
         std::to_string(v.z()) + ")";
}

}  // namespace

void SimConfig::validate() const {
  std::vector<std::string> problems;
  if (!(dt_physics > 0.0)) problems.emplace_back("dt_physics must be > 0");
  if (!(dt_control > 0.0)) problems.emplace_back("dt_control must be > 0");
  if (dt_physics > 0.0 && dt_control > 0.0) {
    const double ratio = dt_control / dt_physics;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
      problems.emplace_back("dt_control must be a positive integer multiple of dt_physics");
    }
  }
  if (!(tau > 0.0)) problems.emplace_back("tau must be > 0");
  if (!(v_max > 0.0)) problems.emplace_back("v_max must be > 0");
  if (!(bounds.min.array() < bounds.max.array()).all()) {
    problems.emplace_back("world bounds are degenerate");
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

int SimConfig::substeps() const { return static_cast<int>(std::lround(dt_control / dt_physics)); }

std::string_view to_string(BackgroundStyle b) noexcept {
  switch (b) {
    case BackgroundStyle::Default: return "default";
    case BackgroundStyle::AltColor: return "alt_color";
    case BackgroundStyle::Cluttered: return "cluttered";
  }
  return "unknown";
}

BackgroundStyle background_from_string(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto b : {BackgroundStyle::Default, BackgroundStyle::AltColor, BackgroundStyle::Cluttered}) {
    if (n == to_string(b)) return b;
  }
  throw ParseError("unknown background style '" + std::string(name) +
                   "' (expected default, alt_color or cluttered)");
}

std::vector<std::string> scene_violations(const SceneConfig& scene, const WorldBounds& bounds) {
  std::vector<std::string> out;
  if (!scene.drone_start.allFinite() || !bounds.contains(scene.drone_start)) {
    out.push_back("drone_start " + fmt_vec(scene.drone_start) + " is outside the world bounds");
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    if (!o.position.allFinite() || !bounds.contains(o.position)) {
      out.push_back("object " + std::to_string(i) + " position " + fmt_vec(o.position) +
                    " is outside the world bounds");
    }
    if (!(o.size > 0.0) || !std::isfinite(o.size)) {
      out.push_back("object " + std::to_string(i) + " size must be > 0");
    }
  }
  return out;
}

WorldState spawn(const SceneConfig& scene, const SimConfig& cfg) {
  cfg.validate();
  auto problems = scene_violations(scene, cfg.bounds);
  if (!problems.empty()) throw ValidationError(std::move(problems));

  WorldState w;
  w.drone.position = scene.drone_start;
  w.drone.velocity = Vec3::Zero();
  w.objects = scene.objects;
  w.background = scene.background;
  w.rng = Rng(cfg.seed);
  return w;
}

namespace {

void advance(WorldState& next, const Vec3& v_cmd, const SimConfig& cfg) {
  const double gain = cfg.dt_physics / cfg.tau;
  const Vec3 cmd = v_cmd.cwiseMax(-cfg.v_max).cwiseMin(cfg.v_max);
  for (int axis = 0; axis < 3; ++axis) {
    double v = next.drone.velocity[axis];
    v = v + gain * (cmd[axis] - v);
    double p = next.drone.position[axis] + v * cfg.dt_physics;
    if (p < cfg.bounds.min[axis]) {
      p = cfg.bounds.min[axis];
      v = 0.0;
    } else if (p > cfg.bounds.max[axis]) {
      p = cfg.bounds.max[axis];
      v = 0.0;
    }
    next.drone.velocity[axis] = v;
    next.drone.position[axis] = p;
  }
  next.physics_ticks += 1;
  next.sim_time = static_cast<double>(next.physics_ticks) * cfg.dt_physics;
}

}  // namespace

WorldState step_physics(const WorldState& w, const Vec3& v_cmd, const SimConfig& cfg) {
  WorldState next = w;
  advance(next, v_cmd, cfg);
  return next;
}

std::pair<WorldState, TrajectorySample> step_control(const WorldState& w, const ActionVector& a,
                                                     const SimConfig& cfg) {
  if (!action_in_range(a)) throw RangeError("action is outside the declared component ranges");
  WorldState next = w;
  const Vec3 v_cmd = a.velocity();
  const int n = cfg.substeps();
  for (int i = 0; i < n; ++i) advance(next, v_cmd, cfg);
  next.last_action = a;
  return {next, TrajectorySample{next.sim_time, next.drone.position}};
}

std::optional<ContactReport> contact_query(const WorldState& w) {
  if (w.objects.empty()) return std::nullopt;
  ContactReport best;
  best.distance = INFINITY;
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    const double d = (w.drone.position - w.objects[i].position).norm();
    if (d < best.distance) {
      best.distance = d;
      best.object_index = i;
    }
  }
  best.in_contact = best.distance <= w.objects[best.object_index].size + kContactMargin;
  return best;
}

}  // namespace hapticdrone::sim
