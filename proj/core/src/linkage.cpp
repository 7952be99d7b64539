#include "hapticdrone/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::linkage {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleTolerance = 1e-12;

// Brings an angle into [servo_min, servo_max] by whole turns when possible.
std::optional<double> fit_to_limits(double theta, const LinkageGeometry& g) {
  for (double candidate : {theta, theta - kTwoPi, theta + kTwoPi}) {
    if (candidate >= g.servo_min - kAngleTolerance && candidate <= g.servo_max + kAngleTolerance) {
      return std::clamp(candidate, g.servo_min, g.servo_max);
    }
  }
  return std::nullopt;
}

void check_angle(double theta, const LinkageGeometry& g, const char* name) {
  if (!std::isfinite(theta) || theta < g.servo_min - kAngleTolerance ||
      theta > g.servo_max + kAngleTolerance) {
    throw LimitError(std::string(name) + " = " + std::to_string(theta) +
                     " rad is outside the servo range [" + std::to_string(g.servo_min) + ", " +
                     std::to_string(g.servo_max) + "]");
  }
}

// Annulus distance: positive outside, zero or negative inside.
double annulus_excess(const LinkageGeometry& g, double r) {
  const double outer = g.proximal_length + g.distal_length;
  const double inner = std::abs(g.proximal_length - g.distal_length);
  return std::max(r - outer, inner - r);
}

// Interior angle at the base between the target ray and the proximal link.
double base_interior_angle(const LinkageGeometry& g, double r) {
  const double l1 = g.proximal_length;
  const double l2 = g.distal_length;
  const double c = (l1 * l1 + r * r - l2 * l2) / (2.0 * l1 * r);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

void LinkageGeometry::validate() const {
  std::vector<std::string> problems;
  if (!(base_separation > 0.0)) problems.emplace_back("base_separation must be > 0");
  if (!(proximal_length > 0.0)) problems.emplace_back("proximal_length must be > 0");
  if (!(distal_length > 0.0)) problems.emplace_back("distal_length must be > 0");
  if (!(proximal_length + distal_length > 0.5 * base_separation)) {
    problems.emplace_back("workspace is empty: l1 + l2 must exceed d / 2");
  }
  if (!(servo_min < servo_max)) problems.emplace_back("servo_min must be < servo_max");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::pair<Vec2, Vec2> elbow_points(const LinkageGeometry& g, const ServoAngles& a) {
  const Vec2 e1 = g.left_base() + g.proximal_length * Vec2(std::cos(a.theta1), std::sin(a.theta1));
  const Vec2 e2 =
      g.right_base() + g.proximal_length * Vec2(std::cos(a.theta2), std::sin(a.theta2));
  return {e1, e2};
}

Vec2 forward_kinematics(const LinkageGeometry& g, const ServoAngles& angles) {
  check_angle(angles.theta1, g, "theta1");
  check_angle(angles.theta2, g, "theta2");
  const auto [e1, e2] = elbow_points(g, angles);

  const Vec2 delta = e2 - e1;
  const double dist = delta.norm();
  if (dist < 1e-12) {
    throw SingularConfigurationError("elbows coincide; end effector is undetermined");
  }
  const double l2 = g.distal_length;
  const double half = 0.5 * dist;
  double h_sq = l2 * l2 - half * half;
  if (h_sq < 0.0) {
    if (h_sq < -1e-12 * l2 * l2) {
      throw SingularConfigurationError("distal circles are disjoint (elbow separation " +
                                       std::to_string(dist) + " m > 2 * l2)");
    }
    h_sq = 0.0;  // tangent within rounding
  }
  const double h = std::sqrt(h_sq);
  const Vec2 mid = e1 + 0.5 * delta;
  Vec2 normal(-delta.y() / dist, delta.x() / dist);
  if (normal.y() < 0.0) normal = -normal;
  return mid + h * normal;
}

ServoAngles inverse_kinematics(const LinkageGeometry& g, const Vec2& target) {
  if (!target.allFinite()) throw WorkspaceError("target is not finite", INFINITY);

  const Vec2 to_left = target - g.left_base();
  const Vec2 to_right = target - g.right_base();
  const double r1 = to_left.norm();
  const double r2 = to_right.norm();

  const double excess = std::max(annulus_excess(g, r1), annulus_excess(g, r2));
  if (excess > 1e-12) {
    throw WorkspaceError("target (" + std::to_string(target.x()) + ", " +
                             std::to_string(target.y()) + ") is outside the workspace by " +
                             std::to_string(excess) + " m",
                         excess);
  }
  if (r1 < 1e-15 || r2 < 1e-15) {
    throw SingularConfigurationError("target coincides with a base pivot");
  }

  // Elbow-outward: the left elbow swings counterclockwise of the target ray,
  // the right elbow clockwise.
  const double raw1 = std::atan2(to_left.y(), to_left.x()) + base_interior_angle(g, r1);
  const double raw2 = std::atan2(to_right.y(), to_right.x()) - base_interior_angle(g, r2);

  const auto theta1 = fit_to_limits(raw1, g);
  const auto theta2 = fit_to_limits(raw2, g);
  if (!theta1 || !theta2) {
    throw LimitError("elbow-outward branch for target (" + std::to_string(target.x()) + ", " +
                     std::to_string(target.y()) + ") leaves the servo range");
  }
  const ServoAngles angles{*theta1, *theta2};

  // The target must be the elevated intersection that forward kinematics selects.
  const auto [e1, e2] = elbow_points(g, angles);
  const Vec2 delta = e2 - e1;
  const double dist = delta.norm();
  if (dist > 1e-12) {
    Vec2 normal(-delta.y() / dist, delta.x() / dist);
    if (normal.y() < 0.0) normal = -normal;
    if ((target - (e1 + 0.5 * delta)).dot(normal) < -1e-9) {
      throw WorkspaceError("target is only reachable on the lower assembly branch", 0.0);
    }
  }
  return angles;
}

bool workspace_contains(const LinkageGeometry& g, const Vec2& p) {
  try {
    (void)inverse_kinematics(g, p);
    return true;
  } catch (const WorkspaceError&) {
  } catch (const LimitError&) {
  } catch (const SingularConfigurationError&) {
  }
  return false;
}

PatternProfile encode_shape_profile(Shape s) noexcept {
  switch (s) {
    case Shape::Cube: return {{1.0, 1.0, 1.0}};
    case Shape::Sphere: return {{0.7, 1.0, 0.7}};
    case Shape::Cone: return {{0.2, 1.0, 0.2}};
  }
  return {{1.0, 1.0, 1.0}};
}

double vibration_frequency_hz(VibrationLevel level) noexcept {
  switch (level) {
    case VibrationLevel::High: return 25.0;
    case VibrationLevel::Low: return 10.0;
    case VibrationLevel::Null: return 0.0;
  }
  return 0.0;
}

double vibration_amplitude(VibrationLevel level) noexcept {
  switch (level) {
    case VibrationLevel::High: return 0.10;
    case VibrationLevel::Low: return 0.05;
    case VibrationLevel::Null: return 0.0;
  }
  return 0.0;
}

double vibration_offset(VibrationLevel level, double t) noexcept {
  if (level == VibrationLevel::Null) return 0.0;
  return vibration_amplitude(level) * std::sin(kTwoPi * vibration_frequency_hz(level) * t);
}

VibrationLevel vibration_level_for(double hv) noexcept {
  if (hv >= 0.75) return VibrationLevel::High;
  if (hv >= 0.25) return VibrationLevel::Low;
  return VibrationLevel::Null;
}

ArrayCommand pattern_array_command(const PatternProfile& profile, double e0,
                                   VibrationLevel level, double t) noexcept {
  ArrayCommand cmd;
  const double offset = vibration_offset(level, t);
  for (std::size_t i = 0; i < cmd.extensions.size(); ++i) {
    cmd.extensions[i] = std::clamp(e0 * profile.heights[i] + offset, 0.0, 1.0);
  }
  cmd.vibration = level;
  cmd.vibration_phase =
      level == VibrationLevel::Null
          ? 0.0
          : std::fmod(kTwoPi * vibration_frequency_hz(level) * t, kTwoPi);
  return cmd;
}

DeviceCommand haptic_to_array_commands(const HapticInput& h, const std::optional<Contact>& contact,
                                       double t) {
  const std::array<std::pair<const char*, double>, 3> dirs = {
      {{"hx", h.hx}, {"hy", h.hy}, {"hz", h.hz}}};
  for (const auto& [name, value] : dirs) {
    if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
      throw RangeError(std::string("haptic component ") + name + " = " + std::to_string(value) +
                       " is outside [-1, 1]");
    }
  }
  if (!std::isfinite(h.hv) || h.hv < 0.0 || h.hv > 1.0) {
    throw RangeError("haptic component hv = " + std::to_string(h.hv) + " is outside [0, 1]");
  }

  const double magnitude = std::sqrt(h.hx * h.hx + h.hy * h.hy + h.hz * h.hz);
  const double e0 = std::clamp(magnitude / std::sqrt(3.0), 0.0, 1.0);
  const PatternProfile profile =
      contact ? encode_shape_profile(contact->shape) : PatternProfile{{1.0, 1.0, 1.0}};
  const ArrayCommand cmd = pattern_array_command(profile, e0, vibration_level_for(h.hv), t);
  return {cmd, cmd};
}

LinkageDriver::LinkageDriver(LinkageGeometry g, TravelSegment travel)
    : geometry_(g), travel_(travel) {
  geometry_.validate();
  if (!(travel_.y_extended > travel_.y_retracted)) {
    throw ValidationError({"travel segment must satisfy y_extended > y_retracted"});
  }
  constexpr int kChecks = 101;
  for (int i = 0; i < kChecks; ++i) {
    const Vec2 p = extension_target(static_cast<double>(i) / (kChecks - 1));
    if (!workspace_contains(geometry_, p)) {
      throw ValidationError({"travel segment point (" + std::to_string(p.x()) + ", " +
                             std::to_string(p.y()) + ") is outside the workspace"});
    }
  }
}

Vec2 LinkageDriver::extension_target(double extension) const {
  const double y = travel_.y_retracted + extension * (travel_.y_extended - travel_.y_retracted);
  return {geometry_.midline_x(), y};
}

ServoAngles LinkageDriver::extension_to_angles(int array_slot, double extension) const {
  if (array_slot < 0 || array_slot >= kSlotsPerArray) {
    throw InputError("array slot must be 0, 1 or 2, got " + std::to_string(array_slot));
  }
  if (!std::isfinite(extension) || extension < 0.0 || extension > 1.0) {
    throw RangeError("extension " + std::to_string(extension) + " is outside [0, 1]");
  }
  return inverse_kinematics(geometry_, extension_target(extension));
}

ServoAngles extension_to_angles(const LinkageGeometry& g, int array_slot, double extension) {
  return LinkageDriver(g).extension_to_angles(array_slot, extension);
}

double servo_pulse_us(double angle, double servo_min, double servo_max) {
  if (!(servo_min < servo_max)) throw InputError("servo_min must be < servo_max");
  if (!std::isfinite(angle) || angle < servo_min || angle > servo_max) {
    throw RangeError("servo angle " + std::to_string(angle) + " rad is outside [" +
                     std::to_string(servo_min) + ", " + std::to_string(servo_max) + "]");
  }
  return 500.0 + 2000.0 * (angle - servo_min) / (servo_max - servo_min);
}

}  // namespace hapticdrone::linkage
