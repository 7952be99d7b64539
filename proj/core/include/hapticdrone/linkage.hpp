#pragma once

// Planar inverse five-bar linkage: two servos at base pivots (0, 0) and
// (d, 0) drive proximal links of length l1; two distal links of length l2
// meet at the end effector. Angles are measured counterclockwise from +x.

#include <array>
#include <numbers>
#include <optional>
#include <utility>

#include "hapticdrone/core_model.hpp"

namespace hapticdrone::linkage {

struct LinkageGeometry {
  double base_separation = 0.04;  ///< d, m
  double proximal_length = 0.05;  ///< l1, m
  double distal_length = 0.07;    ///< l2, m
  double servo_min = 0.0;         ///< rad
  double servo_max = std::numbers::pi;

  /// Throws ValidationError on non-positive lengths, an empty workspace or
  /// inverted servo limits.
  void validate() const;

  Vec2 left_base() const { return {0.0, 0.0}; }
  Vec2 right_base() const { return {base_separation, 0.0}; }
  double midline_x() const { return 0.5 * base_separation; }
};

struct ServoAngles {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Elbow positions for the given servo angles (left, right).
std::pair<Vec2, Vec2> elbow_points(const LinkageGeometry& g, const ServoAngles& angles);

/// End-effector position on the branch farther from the base (larger y).
/// Throws LimitError for out-of-range angles and SingularConfigurationError
/// when the distal circles are disjoint or coincident.
Vec2 forward_kinematics(const LinkageGeometry& g, const ServoAngles& angles);

/// Elbow-outward solution of both two-link subchains. Throws WorkspaceError
/// (carrying the distance to the workspace) for unreachable targets and
/// LimitError when the branch leaves the servo range.
ServoAngles inverse_kinematics(const LinkageGeometry& g, const Vec2& target);

/// Annulus test on both subchains plus servo limits of the solved branch.
/// Annulus boundaries count as reachable.
bool workspace_contains(const LinkageGeometry& g, const Vec2& p);

/// Normalized heights of the three linkages in one array.
struct PatternProfile {
  std::array<double, 3> heights{};

  friend bool operator==(const PatternProfile&, const PatternProfile&) = default;
};

PatternProfile encode_shape_profile(Shape s) noexcept;

/// Extension modulation for a vibration level at time t (s).
double vibration_offset(VibrationLevel level, double t) noexcept;
double vibration_frequency_hz(VibrationLevel level) noexcept;
double vibration_amplitude(VibrationLevel level) noexcept;

/// hv in [0, 0.25) -> Null, [0.25, 0.75) -> Low, [0.75, 1] -> High.
VibrationLevel vibration_level_for(double hv) noexcept;

struct ArrayCommand {
  std::array<double, 3> extensions{};  ///< index 0 = leftmost linkage
  VibrationLevel vibration = VibrationLevel::Null;
  double vibration_phase = 0.0;        ///< rad, in [0, 2*pi)

  friend bool operator==(const ArrayCommand&, const ArrayCommand&) = default;
};

/// Left-hand and right-hand arrays.
using DeviceCommand = std::pair<ArrayCommand, ArrayCommand>;

struct HapticInput {
  double hx = 0.0;
  double hy = 0.0;
  double hz = 0.0;
  double hv = 0.0;

  static HapticInput from_action(const ActionVector& a) { return {a.hx, a.hy, a.hz, a.hv}; }
};

struct Contact {
  Shape shape = Shape::Cube;
  Texture texture = Texture::Food;
};

/// Maps the haptic action components onto both arrays. Throws RangeError for
/// components outside their declared ranges.
DeviceCommand haptic_to_array_commands(const HapticInput& h, const std::optional<Contact>& contact,
                                       double t);

/// Command for an explicitly chosen pattern at base extension e0. Used to
/// render the nine study patterns independently of the hv channel.
ArrayCommand pattern_array_command(const PatternProfile& profile, double e0,
                                   VibrationLevel level, double t) noexcept;

/// Vertical end-effector travel of one linkage, on the midline x = d/2.
struct TravelSegment {
  double y_retracted = 0.08;
  double y_extended = 0.115;
};

/// Maps normalized extensions to servo angles. The whole travel segment is
/// checked against the workspace at construction.
class LinkageDriver {
 public:
  static constexpr int kSlotsPerArray = 3;

  explicit LinkageDriver(LinkageGeometry g = {}, TravelSegment travel = {});

  const LinkageGeometry& geometry() const noexcept { return geometry_; }
  const TravelSegment& travel() const noexcept { return travel_; }

  Vec2 extension_target(double extension) const;
  ServoAngles extension_to_angles(int array_slot, double extension) const;

 private:
  LinkageGeometry geometry_;
  TravelSegment travel_;
};

/// Uses the default geometry and travel segment.
ServoAngles extension_to_angles(const LinkageGeometry& g, int array_slot, double extension);

/// Linear map of [servo_min, servo_max] onto [500, 2500] microseconds.
double servo_pulse_us(double angle, double servo_min, double servo_max);

}  // namespace hapticdrone::linkage
