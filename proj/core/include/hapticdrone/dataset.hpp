#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/evaluation.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/world.hpp"

// Episode layout on disk:
//   root/dataset_info.json
//   root/{episode_id}/meta.json
//   root/{episode_id}/episode.jsonl            one step per LF-terminated line
//   root/{episode_id}/step_{i:05}_{real|vr}.png
// An INCOMPLETE marker stays in the episode directory if recording aborts.

namespace hapticdrone::dataset {

inline constexpr std::size_t kStepCap = 110;
inline constexpr std::size_t kVariations = 50;
inline constexpr std::size_t kCells = 9;
inline constexpr int kDatasetVersion = 1;
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";
inline constexpr const char* kManifestName = "dataset_info.json";

struct EpisodeMeta {
  std::string episode_id;
  Shape shape = Shape::Cube;
  Texture texture = Texture::Food;
  Vec3 drone_start = Vec3::Zero();
  Vec3 target_position = Vec3::Zero();
  std::string instruction;
  std::uint64_t seed = 0;
  std::size_t num_steps = 0;
  eval::OutcomeClass outcome = eval::OutcomeClass::Fail;

  friend bool operator==(const EpisodeMeta&, const EpisodeMeta&) = default;
};

struct StepRecord {
  std::size_t step_index = 0;
  bool is_first = false;
  bool is_last = false;
  bool is_terminal = false;  ///< same as is_last
  std::string real_frame;    ///< file name relative to the episode directory
  std::string vr_frame;
  std::string instruction;
  std::vector<double> action;
  Vec3 drone_position = Vec3::Zero();  ///< before the step's action is applied

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct LoadedStep {
  StepRecord record;
  FrameRaster real;
  FrameRaster vr;

  friend bool operator==(const LoadedStep&, const LoadedStep&) = default;
};

struct Episode {
  EpisodeMeta meta;
  std::vector<LoadedStep> steps;

  friend bool operator==(const Episode&, const Episode&) = default;
};

struct RecordConfig {
  sim::SimConfig sim;  ///< sim.seed is stored as the episode seed
  eval::FlightCriteria criteria;
  std::size_t step_cap = kStepCap;
};

std::string frame_name(std::size_t step, bool real);

/// Runs the closed loop from world until arrival-and-hover or the step cap.
/// The target is the object the instruction designates in the initial
/// world. out_dir is created; it must not already hold an episode. Throws
/// IoError (leaving the INCOMPLETE marker) or the policy's error.
EpisodeMeta record_episode(const sim::WorldState& world, policy::Policy& policy,
                           const std::string& instruction, const RecordConfig& cfg,
                           const std::filesystem::path& out_dir, const std::string& episode_id);

struct EpisodeFailure {
  std::string episode_id;
  std::string reason;
};

struct DatasetManifest {
  int version = kDatasetVersion;
  std::size_t episode_count = 0;
  std::array<std::size_t, kCells> per_cell_counts{};  ///< index 3 * shape + texture
  std::size_t total_steps = 0;
  std::uint64_t base_seed = 0;
  std::vector<EpisodeFailure> failures;
};

struct GenerateOptions {
  RecordConfig record;
  std::size_t variations = kVariations;
  unsigned jobs = 1;
};

/// One start/placement variation, shared by all nine cells.
struct Variation {
  Vec3 drone_start = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double size = 0.2;
};

Variation make_variation(std::uint64_t base_seed, std::size_t index, std::size_t count);
std::size_t cell_index(Shape s, Texture t) noexcept;
std::string episode_id(std::size_t variation, Shape s, Texture t);

/// Writes variations x 9 episodes driven by the privileged oracle, then the
/// manifest. Episode failures are recorded and generation continues. Throws
/// InputError when root exists and is not empty.
DatasetManifest generate_dataset(const std::filesystem::path& root, std::uint64_t base_seed,
                                 const GenerateOptions& opts = {});

struct Violation {
  std::string episode_id;  ///< empty for dataset-level problems
  std::optional<std::size_t> step;
  std::string kind;  ///< missing_frame, bad_frame, arity, range, flags, ...
  std::string message;
};

struct ValidationReport {
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Throws IoError when root is missing or unreadable.
ValidationReport validate_dataset(const std::filesystem::path& root);
std::string format_violation(const Violation& v);

/// Throws FormatError naming the file (and line for episode.jsonl).
Episode load_episode(const std::filesystem::path& dir);
DatasetManifest load_manifest(const std::filesystem::path& root);

/// SHA-256 over sorted relative paths and file contents, lowercase hex.
std::string hash_tree(const std::filesystem::path& root);

}  // namespace hapticdrone::dataset
