#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hapticdrone/evaluation.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/world.hpp"

namespace hapticdrone::eval {

/// The three hover targets of the reference flight experiment.
inline const std::array<Vec3, 3> kReferenceTargets{Vec3{1.0, -1.0, 1.0}, Vec3{0.0, -1.0, 1.0},
                                                   Vec3{1.0, 1.0, 1.0}};

struct SuiteConfig {
  sim::SimConfig sim;
  FlightCriteria criteria;
  std::uint64_t seed = 0;
  Vec3 start_center{-1.5, 0.0, 1.0};
  double start_jitter = 0.2;  ///< m, uniform per horizontal axis
  Shape target_shape = Shape::Sphere;
  Texture target_texture = Texture::Food;
  double target_size = 0.2;
  std::string instruction = "fly to the sphere";
};

struct TrialRecord {
  std::size_t pose_index = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Vec3 start = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  std::string instruction;
  FlightOutcome outcome;
  sim::Trajectory trajectory;
  std::optional<std::string> failure;  ///< policy error that ended the trial
};

struct PoseReport {
  Vec3 pose = Vec3::Zero();
  FlightSummary summary;
};

struct FlightSuiteReport {
  std::string policy;
  FlightCriteria criteria;
  std::vector<TrialRecord> trials;
  std::vector<PoseReport> per_pose;
  FlightSummary overall;
};

/// Seeded jittered start for one trial.
Vec3 trial_start(const SuiteConfig& cfg, std::uint64_t trial_seed);
std::uint64_t trial_seed(std::uint64_t base, std::size_t pose_index, std::size_t trial);

/// Runs trials_per_pose closed-loop trials per pose; the policy is reset
/// before each. Policy errors end that trial as Fail with the reason kept.
/// Throws InputError for an out-of-bounds pose or zero trials.
FlightSuiteReport run_flight_suite(policy::Policy& policy, const std::vector<Vec3>& poses,
                                   std::size_t trials_per_pose, const SuiteConfig& cfg);

std::string suite_report_json(const FlightSuiteReport& r);
/// Per-pose and overall rows.
std::string suite_summary_csv(const FlightSuiteReport& r);
/// pose,trial,t,x,y,outcome rows for plotting.
std::string trajectories_csv(const FlightSuiteReport& r);

enum class Axis : std::uint8_t { Visual = 0, Motion = 1, Physical = 2, Semantic = 3 };

inline constexpr std::array<Axis, 4> kAllAxes{Axis::Visual, Axis::Motion, Axis::Physical,
                                              Axis::Semantic};

std::string_view to_string(Axis a) noexcept;
Axis axis_from_string(std::string_view name);
/// Reference success rate of the learned model on each axis, percent.
double reference_rate(Axis a) noexcept;

/// A scene, its instruction, and which object counts as the target.
struct GeneralizationCase {
  sim::SceneConfig scene;
  std::string instruction;
  std::size_t target_index = 0;
};

/// Visual: new background, distractors recolored. Motion: 1-2 distractors of
/// another shape at least 1 m from the target. Physical: target size scaled
/// by a factor in [0.5, 2] and/or texture swapped. Semantic: held-out
/// relative or follow template. The target stays designated by the
/// instruction in every case.
GeneralizationCase perturb_scene(Axis axis, const GeneralizationCase& base, std::uint64_t seed,
                                 const sim::WorldBounds& bounds = {});

/// Deterministic physical perturbation.
GeneralizationCase perturb_physical(const GeneralizationCase& base, double size_factor,
                                    bool swap_texture);

/// Unperturbed case for trial k: reference target k mod 3 from a jittered
/// start.
GeneralizationCase base_case(const SuiteConfig& cfg, std::size_t k);

struct CaseResult {
  GeneralizationCase c;
  FlightOutcome outcome;
  std::optional<std::string> failure;
};

/// Policy errors (including unparseable instructions) count as Fail.
CaseResult run_case(policy::Policy& policy, const GeneralizationCase& c, const SuiteConfig& cfg,
                    std::uint64_t seed);

struct AxisReport {
  Axis axis = Axis::Visual;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double reference_rate = 0.0;  ///< percent
  std::vector<CaseResult> cases;
};

struct GeneralizationReport {
  std::string policy;
  std::size_t trials_per_axis = 0;
  double base_rate = 0.0;  ///< same cases, unperturbed
  std::vector<AxisReport> axes;
};

/// Throws InputError when trials_per_axis is zero.
GeneralizationReport run_generalization(policy::Policy& policy, const std::vector<Axis>& axes,
                                        std::size_t trials_per_axis, const SuiteConfig& cfg);

std::string generalization_report_json(const GeneralizationReport& r);
std::string generalization_csv(const GeneralizationReport& r);

}  // namespace hapticdrone::eval
