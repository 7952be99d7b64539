#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/rng.hpp"

namespace hapticdrone::sim {

struct WorldBounds {
  Vec3 min{-3.2, -1.6, 0.2};
  Vec3 max{3.2, 1.6, 2.5};

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

struct SimConfig {
  double dt_physics = 0.01;  ///< s
  double dt_control = 0.2;   ///< s, integer multiple of dt_physics
  double tau = 0.3;          ///< velocity lag time constant, s
  double v_max = 1.0;        ///< m/s
  WorldBounds bounds{};
  std::uint64_t seed = 0;

  /// Throws ValidationError when any invariant is broken.
  void validate() const;
  /// Physics substeps per control tick.
  int substeps() const;
};

enum class BackgroundStyle : std::uint8_t { Default = 0, AltColor = 1, Cluttered = 2 };

std::string_view to_string(BackgroundStyle b) noexcept;
BackgroundStyle background_from_string(std::string_view name);

struct SceneConfig {
  Vec3 drone_start{0.0, 0.0, 1.0};
  std::vector<VirtualObject> objects;
  BackgroundStyle background = BackgroundStyle::Default;

  friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

/// Every violation of the scene invariants against the given bounds.
std::vector<std::string> scene_violations(const SceneConfig& scene, const WorldBounds& bounds);

struct WorldState {
  DroneState drone;
  std::vector<VirtualObject> objects;
  BackgroundStyle background = BackgroundStyle::Default;
  double sim_time = 0.0;
  std::uint64_t physics_ticks = 0;
  ActionVector last_action;  ///< haptic components are recorded here only
  Rng rng;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct TrajectorySample {
  double sim_time = 0.0;
  Vec3 position = Vec3::Zero();

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

using Trajectory = std::vector<TrajectorySample>;

/// Throws ValidationError listing every scene or config violation.
WorldState spawn(const SceneConfig& scene, const SimConfig& cfg);

/// One first-order velocity-lag step of length cfg.dt_physics.
WorldState step_physics(const WorldState& w, const Vec3& v_cmd, const SimConfig& cfg);

/// One control tick: cfg.substeps() physics steps under the action's
/// velocity. The haptic components never reach the plant.
std::pair<WorldState, TrajectorySample> step_control(const WorldState& w, const ActionVector& a,
                                                     const SimConfig& cfg);

struct ContactReport {
  std::size_t object_index = 0;
  double distance = 0.0;  ///< center distance, m
  bool in_contact = false;
};

inline constexpr double kContactMargin = 0.1;

/// Nearest object by center distance; std::nullopt for an empty scene.
std::optional<ContactReport> contact_query(const WorldState& w);

}  // namespace hapticdrone::sim
