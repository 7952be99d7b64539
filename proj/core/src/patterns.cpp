#include "hapticdrone/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/policy.hpp"

namespace hapticdrone::eval {

PatternSignal render_pattern_signal(const HapticPattern& pattern, Texture texture,
                                    double magnitude) {
  PatternSignal sig;
  sig.hv = policy::texture_intensity(texture);
  const auto profile = linkage::encode_shape_profile(pattern.shape);
  for (std::size_t i = 0; i < kPatternSamples; ++i) {
    const double t = static_cast<double>(i) / kPatternSampleRateHz;
    const auto cmd = linkage::pattern_array_command(profile, magnitude, pattern.vibration, t);
    sig.left.push_back(cmd.extensions);
    sig.right.push_back(cmd.extensions);
  }
  return sig;
}

Texture decode_texture(double hv) noexcept {
  if (hv <= 0.45) return Texture::Food;
  if (hv >= 0.75) return Texture::Plastic;
  return Texture::Other;
}

PatternDecode decode_pattern(const PatternSignal& signal) {
  if (std::abs(signal.sample_rate_hz - kPatternSampleRateHz) > 1e-9) {
    throw InputError("pattern signal must be sampled at 100 Hz");
  }
  if (signal.left.size() != kPatternSamples || signal.right.size() != kPatternSamples) {
    throw InputError("pattern signal must hold 100 samples (1 s) per array");
  }

  PatternDecode out;
  out.texture = decode_texture(signal.hv);

  // Both arrays carry the same pattern; average them.
  const double n = static_cast<double>(kPatternSamples);
  std::array<double, 3> mean{};
  std::vector<double> middle(kPatternSamples);
  for (std::size_t i = 0; i < kPatternSamples; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      mean[k] += 0.5 * (signal.left[i][k] + signal.right[i][k]) / n;
    }
    middle[i] = 0.5 * (signal.left[i][1] + signal.right[i][1]);
  }

  const double middle_mean = mean[1];
  double best_amp = 0.0;
  std::size_t best_bin = 0;
  for (std::size_t bin = 1; bin <= kPatternSamples / 2; ++bin) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < kPatternSamples; ++i) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(bin * i) / n;
      re += (middle[i] - middle_mean) * std::cos(phase);
      im -= (middle[i] - middle_mean) * std::sin(phase);
    }
    const double amp = 2.0 * std::hypot(re, im) / n;
    if (amp > best_amp + 1e-12) {
      best_amp = amp;
      best_bin = bin;
    }
  }
  out.dominant_amplitude = best_amp;
  out.dominant_frequency_hz = static_cast<double>(best_bin) * kPatternSampleRateHz / n;
  if (best_amp < kAmplitudeFloor) {
    out.vibration = VibrationLevel::Null;
  } else {
    const double high = linkage::vibration_frequency_hz(VibrationLevel::High);
    const double low = linkage::vibration_frequency_hz(VibrationLevel::Low);
    out.vibration = std::abs(out.dominant_frequency_hz - high) <
                            std::abs(out.dominant_frequency_hz - low)
                        ? VibrationLevel::High
                        : VibrationLevel::Low;
  }

  const double peak = *std::max_element(mean.begin(), mean.end());
  if (peak < kAmplitudeFloor) return out;  // nothing rendered: shape is ambiguous

  double best_dist = INFINITY;
  for (Shape s : kAllShapes) {
    const auto profile = linkage::encode_shape_profile(s);
    double dist = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      dist = std::max(dist, std::abs(mean[k] / peak - profile.heights[k]));
    }
    if (dist < best_dist) {
      best_dist = dist;
      out.shape = s;
    }
  }
  return out;
}

}  // namespace hapticdrone::eval
