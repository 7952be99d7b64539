#include "hapticdrone/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "hapticdrone/errors.hpp"

namespace hapticdrone {

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "validation failed:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr double lower_bound_of(std::size_t component) { return component == 6 ? 0.0 : -1.0; }

}  // namespace

ActionVector clamp_action(const ActionVector& a) {
  auto xs = action_to_list(a);
  for (std::size_t i = 0; i < kActionArity; ++i) {
    if (!std::isfinite(xs[i])) {
      throw RangeError("action component " + std::string(kActionComponentNames[i]) +
                       " is not finite");
    }
    xs[i] = std::clamp(xs[i], lower_bound_of(i), 1.0);
  }
  return {xs[0], xs[1], xs[2], xs[3], xs[4], xs[5], xs[6]};
}

bool action_in_range(const ActionVector& a) noexcept {
  const auto xs = action_to_list(a);
  for (std::size_t i = 0; i < kActionArity; ++i) {
    if (!std::isfinite(xs[i]) || xs[i] < lower_bound_of(i) || xs[i] > 1.0) return false;
  }
  return true;
}

std::array<double, kActionArity> action_to_list(const ActionVector& a) noexcept {
  return {a.vx, a.vy, a.vz, a.hx, a.hy, a.hz, a.hv};
}

ActionVector parse_action(std::span<const double> xs) {
  if (xs.size() != kActionArity) {
    throw ParseError("action must have exactly 7 components, got " + std::to_string(xs.size()));
  }
  for (std::size_t i = 0; i < kActionArity; ++i) {
    const std::string name(kActionComponentNames[i]);
    if (!std::isfinite(xs[i])) throw ParseError("action component " + name + " is not finite");
    if (xs[i] < lower_bound_of(i) || xs[i] > 1.0) {
      throw ParseError("action component " + name + " = " + std::to_string(xs[i]) +
                       " is out of range");
    }
  }
  return {xs[0], xs[1], xs[2], xs[3], xs[4], xs[5], xs[6]};
}

std::string_view to_string(Shape s) noexcept {
  switch (s) {
    case Shape::Cube: return "cube";
    case Shape::Sphere: return "sphere";
    case Shape::Cone: return "cone";
  }
  return "unknown";
}

std::string_view to_string(Texture t) noexcept {
  switch (t) {
    case Texture::Food: return "food";
    case Texture::Plastic: return "plastic";
    case Texture::Other: return "other";
  }
  return "unknown";
}

std::string_view to_string(VibrationLevel v) noexcept {
  switch (v) {
    case VibrationLevel::High: return "high";
    case VibrationLevel::Low: return "low";
    case VibrationLevel::Null: return "null";
  }
  return "unknown";
}

Shape shape_from_string(std::string_view name) {
  const auto n = lower(name);
  for (Shape s : kAllShapes) {
    if (n == to_string(s)) return s;
  }
  throw ParseError("unknown shape '" + std::string(name) + "' (expected cube, sphere or cone)");
}

Texture texture_from_string(std::string_view name) {
  const auto n = lower(name);
  for (Texture t : kAllTextures) {
    if (n == to_string(t)) return t;
  }
  throw ParseError("unknown texture '" + std::string(name) +
                   "' (expected food, plastic or other)");
}

VibrationLevel vibration_from_string(std::string_view name) {
  const auto n = lower(name);
  for (VibrationLevel v : kAllVibrationLevels) {
    if (n == to_string(v)) return v;
  }
  throw ParseError("unknown vibration level '" + std::string(name) +
                   "' (expected high, low or null)");
}

Shape shape_from_code(int c) {
  if (c < 0 || c > 2) throw ParseError("invalid shape code " + std::to_string(c));
  return static_cast<Shape>(c);
}

Texture texture_from_code(int c) {
  if (c < 0 || c > 2) throw ParseError("invalid texture code " + std::to_string(c));
  return static_cast<Texture>(c);
}

VibrationLevel vibration_from_code(int c) {
  if (c < 0 || c > 2) throw ParseError("invalid vibration code " + std::to_string(c));
  return static_cast<VibrationLevel>(c);
}

std::array<HapticPattern, 9> all_haptic_patterns() noexcept {
  std::array<HapticPattern, 9> out{};
  std::size_t i = 0;
  for (Shape s : kAllShapes) {
    for (VibrationLevel v : kAllVibrationLevels) out[i++] = {s, v};
  }
  return out;
}

FrameRaster::FrameRaster(Rgb fill) : pixels_(kByteSize) {
  for (std::size_t i = 0; i < kByteSize; i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

FrameRaster::FrameRaster(std::vector<std::uint8_t> pixels) : pixels_(std::move(pixels)) {
  if (pixels_.size() != kByteSize) {
    throw InputError("frame raster must hold " + std::to_string(kByteSize) + " bytes, got " +
                     std::to_string(pixels_.size()));
  }
}

void validate_observation(const Observation& obs) {
  if (obs.instruction.empty()) throw InputError("observation instruction is empty");
}

}  // namespace hapticdrone
