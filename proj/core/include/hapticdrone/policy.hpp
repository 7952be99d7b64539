#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/world.hpp"

namespace hapticdrone::policy {

struct ByShape {
  Shape shape;
  friend bool operator==(const ByShape&, const ByShape&) = default;
};
struct ByTexture {
  Texture texture;
  friend bool operator==(const ByTexture&, const ByTexture&) = default;
};
enum class Side : std::uint8_t { Left, Right };
struct Relative {
  Side side;
  friend bool operator==(const Relative&, const Relative&) = default;
};
struct Follow {
  std::variant<ByShape, ByTexture> inner;
  friend bool operator==(const Follow&, const Follow&) = default;
};

using TargetSelector = std::variant<ByShape, ByTexture, Relative, Follow>;

std::string describe(const TargetSelector& sel);

/// The closed instruction grammar, one template per line.
const std::vector<std::string>& supported_templates();

/// Case-insensitive template match. Throws ParseError listing the supported
/// templates when nothing matches.
TargetSelector parse_instruction(std::string_view text);

/// Canonical instruction text for a selector; parse_instruction inverts it.
std::string instruction_for(const TargetSelector& sel);

/// Index of the object the selector designates. Ties among several matches
/// resolve to the one nearest the drone, then the smallest index. Throws
/// ResolutionError when nothing matches.
std::size_t resolve_target(const TargetSelector& sel, const sim::WorldState& w);

struct OracleConfig {
  double kp = 0.8;              ///< 1/s
  double v_clamp = 1.0;         ///< m/s
  double arrival_radius = 0.8;  ///< m

  void validate(double v_max = 1.0) const;
};

/// Texture encoding on the hv channel.
double texture_intensity(Texture t) noexcept;

/// Proportional velocity toward the resolved target, clamped in norm, plus
/// haptics while in contact with that target. Memoryless.
ActionVector oracle_act(const sim::WorldState& w, const TargetSelector& sel,
                        const OracleConfig& cfg, double t);

/// A policy maps an observation (and, for privileged policies, the true
/// world state) to an action within one control period.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual ActionVector act(const Observation& obs, const sim::WorldState* privileged) = 0;
  /// Clears per-episode state. Called before each trial.
  virtual void reset() {}
};

class ZeroPolicy final : public Policy {
 public:
  std::string name() const override { return "zero"; }
  ActionVector act(const Observation&, const sim::WorldState*) override { return {}; }
};

/// Scripted controller with ground-truth access. Throws InputError when no
/// privileged state is supplied.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(OracleConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }
  std::string name() const override { return "oracle"; }
  ActionVector act(const Observation& obs, const sim::WorldState* privileged) override;

 private:
  OracleConfig cfg_;
};

/// Objects recovered from a VR frame by color segmentation.
struct PerceivedObject {
  Shape shape = Shape::Cube;
  Texture texture = Texture::Food;
  Vec2 position = Vec2::Zero();  ///< world xy, m
  double size = 0.0;             ///< m
  std::size_t pixel_count = 0;
};

struct Perception {
  std::optional<Vec2> drone_xy;
  std::vector<PerceivedObject> objects;
};

/// Locates the drone disc in the real frame and the object sprites in the VR
/// frame. Pure function of the pixels.
Perception perceive(const FrameRaster& real, const FrameRaster& vr);

/// Observation-only counterpart of the oracle: perceives the scene from the
/// two frames and applies the same control law in the horizontal plane.
/// Altitude is unobservable from top-down frames, so vz is always zero.
/// Stateless and safe to call concurrently.
class VisionOraclePolicy final : public Policy {
 public:
  explicit VisionOraclePolicy(OracleConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }
  std::string name() const override { return "oracle"; }
  ActionVector act(const Observation& obs, const sim::WorldState* privileged) override;

 private:
  OracleConfig cfg_;
};

}  // namespace hapticdrone::policy
