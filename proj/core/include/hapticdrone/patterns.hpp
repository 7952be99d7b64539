#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/linkage.hpp"

namespace hapticdrone::eval {

inline constexpr double kPatternSampleRateHz = 100.0;
inline constexpr std::size_t kPatternSamples = 100;  ///< one second
inline constexpr double kPatternMagnitude = 0.8;     ///< base extension of rendered patterns

/// Extension time series for both arrays plus the hv channel.
struct PatternSignal {
  double sample_rate_hz = kPatternSampleRateHz;
  std::vector<std::array<double, 3>> left;
  std::vector<std::array<double, 3>> right;
  double hv = 0.0;
};

/// Renders one second of a (shape, vibration) pattern at 100 Hz with the
/// texture carried on hv.
PatternSignal render_pattern_signal(const HapticPattern& pattern, Texture texture,
                                    double magnitude = kPatternMagnitude);

struct PatternDecode {
  std::optional<Shape> shape;  ///< empty when the signal is below the amplitude floor
  VibrationLevel vibration = VibrationLevel::Null;
  Texture texture = Texture::Food;
  double dominant_frequency_hz = 0.0;
  double dominant_amplitude = 0.0;

  bool shape_ambiguous() const noexcept { return !shape.has_value(); }
};

inline constexpr double kAmplitudeFloor = 0.01;

/// Inverts the rendering: shape by nearest L-infinity match of the
/// peak-normalized mean profile, vibration from the dominant DFT bin of the
/// middle linkage, texture from hv thresholds. Throws InputError unless the
/// signal is 100 samples at 100 Hz on both arrays.
PatternDecode decode_pattern(const PatternSignal& signal);

/// hv <= 0.45 -> Food, hv >= 0.75 -> Plastic, otherwise Other.
Texture decode_texture(double hv) noexcept;

}  // namespace hapticdrone::eval
