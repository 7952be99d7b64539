#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hapticdrone {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/**
 * The 7D action exchanged between a policy and the plant.
 *
 * Layout on the wire is (vx, vy, vz, hx, hy, hz, hv). Velocities are m/s in
 * [-1, 1], the haptic direction components are dimensionless in [-1, 1] and
 * the vibration intensity hv lies in [0, 1]. The zero vector means hover
 * with no haptic output.
 */
struct ActionVector {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double hz = 0.0;
  double hv = 0.0;

  Vec3 velocity() const { return {vx, vy, vz}; }
  Vec3 haptic_direction() const { return {hx, hy, hz}; }

  friend bool operator==(const ActionVector&, const ActionVector&) = default;
};

inline constexpr std::size_t kActionArity = 7;
inline constexpr std::array<std::string_view, kActionArity> kActionComponentNames = {
    "vx", "vy", "vz", "hx", "hy", "hz", "hv"};

/// Clamps velocity and direction components to [-1, 1] and hv to [0, 1].
/// Throws RangeError naming the first non-finite component.
ActionVector clamp_action(const ActionVector& a);

/// True when every component is finite and inside its declared range.
bool action_in_range(const ActionVector& a) noexcept;

std::array<double, kActionArity> action_to_list(const ActionVector& a) noexcept;

/// Strict inverse of action_to_list: no clamping. Throws ParseError on wrong
/// arity, non-finite or out-of-range components.
ActionVector parse_action(std::span<const double> xs);

// Integer codes are part of the on-disk format and must never be renumbered.
enum class Shape : std::uint8_t { Cube = 0, Sphere = 1, Cone = 2 };
enum class Texture : std::uint8_t { Food = 0, Plastic = 1, Other = 2 };
enum class VibrationLevel : std::uint8_t { High = 0, Low = 1, Null = 2 };

inline constexpr std::array<Shape, 3> kAllShapes = {Shape::Cube, Shape::Sphere, Shape::Cone};
inline constexpr std::array<Texture, 3> kAllTextures = {Texture::Food, Texture::Plastic,
                                                        Texture::Other};
inline constexpr std::array<VibrationLevel, 3> kAllVibrationLevels = {
    VibrationLevel::High, VibrationLevel::Low, VibrationLevel::Null};

std::string_view to_string(Shape s) noexcept;
std::string_view to_string(Texture t) noexcept;
std::string_view to_string(VibrationLevel v) noexcept;

// Case-insensitive. Throws ParseError on unknown names.
Shape shape_from_string(std::string_view name);
Texture texture_from_string(std::string_view name);
VibrationLevel vibration_from_string(std::string_view name);

Shape shape_from_code(int code);
Texture texture_from_code(int code);
VibrationLevel vibration_from_code(int code);

constexpr int code(Shape s) noexcept { return static_cast<int>(s); }
constexpr int code(Texture t) noexcept { return static_cast<int>(t); }
constexpr int code(VibrationLevel v) noexcept { return static_cast<int>(v); }

struct HapticPattern {
  Shape shape = Shape::Cube;
  VibrationLevel vibration = VibrationLevel::Null;

  friend bool operator==(const HapticPattern&, const HapticPattern&) = default;
};

/// All nine (shape, vibration) patterns, shape-major.
std::array<HapticPattern, 9> all_haptic_patterns() noexcept;

struct VirtualObject {
  Shape shape = Shape::Sphere;
  Texture texture = Texture::Food;
  Vec3 position = Vec3::Zero();
  double size = 0.2;  ///< radius or half-extent, m

  friend bool operator==(const VirtualObject&, const VirtualObject&) = default;
};

struct DroneState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  friend bool operator==(const DroneState&, const DroneState&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Fixed 640x320 RGB8 raster, row-major, top row first.
class FrameRaster {
 public:
  static constexpr int kWidth = 640;
  static constexpr int kHeight = 320;
  static constexpr std::size_t kByteSize = std::size_t{kWidth} * kHeight * 3;

  FrameRaster() : pixels_(kByteSize, 0) {}
  explicit FrameRaster(Rgb fill);
  /// Adopts a pixel buffer; throws InputError unless it holds exactly kByteSize bytes.
  explicit FrameRaster(std::vector<std::uint8_t> pixels);

  int width() const noexcept { return kWidth; }
  int height() const noexcept { return kHeight; }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  const std::vector<std::uint8_t>& data() const noexcept { return pixels_; }

  static constexpr bool contains(int col, int row) noexcept {
    return col >= 0 && col < kWidth && row >= 0 && row < kHeight;
  }
  Rgb at(int col, int row) const noexcept {
    const std::size_t i = offset(col, row);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int col, int row, Rgb c) noexcept {
    const std::size_t i = offset(col, row);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
  /// Writes the pixel when it lies on the canvas, silently clipping otherwise.
  void plot(int col, int row, Rgb c) noexcept {
    if (contains(col, row)) set(col, row, c);
  }

  friend bool operator==(const FrameRaster&, const FrameRaster&) = default;

 private:
  static constexpr std::size_t offset(int col, int row) noexcept {
    return (static_cast<std::size_t>(row) * kWidth + static_cast<std::size_t>(col)) * 3;
  }

  std::vector<std::uint8_t> pixels_;
};

struct Observation {
  FrameRaster real_frame;
  FrameRaster vr_frame;
  std::string instruction;
  std::uint64_t step_index = 0;
};

/// Throws InputError when the instruction is empty.
void validate_observation(const Observation& obs);

}  // namespace hapticdrone
