#include <doctest.h>

#include <cmath>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/patterns.hpp"

using namespace hapticdrone;
using namespace hapticdrone::eval;

TEST_SUITE("patterns") {
  TEST_CASE("all 27 pattern and texture combinations decode") {
    int correct = 0;
    for (const auto& p : all_haptic_patterns()) {
      for (Texture t : kAllTextures) {
        const auto d = decode_pattern(render_pattern_signal(p, t));
        if (d.shape && *d.shape == p.shape && d.vibration == p.vibration && d.texture == t) {
          ++correct;
        }
      }
    }
    CHECK(correct == 27);
  }

  TEST_CASE("cone high with hv 0.9 reads as plastic") {
    const auto s = render_pattern_signal({Shape::Cone, VibrationLevel::High}, Texture::Plastic);
    CHECK(s.hv == doctest::Approx(0.9));
    const auto d = decode_pattern(s);
    CHECK(d.shape == Shape::Cone);
    CHECK(d.vibration == VibrationLevel::High);
    CHECK(d.texture == Texture::Plastic);
  }

  TEST_CASE("decoding survives other magnitudes") {
    for (double m : {0.3, 0.5, 1.0}) {
      for (const auto& p : all_haptic_patterns()) {
        const auto d = decode_pattern(render_pattern_signal(p, Texture::Other, m));
        CHECK(d.shape == p.shape);
        CHECK(d.vibration == p.vibration);
      }
    }
  }

  TEST_CASE("vibration levels have distinct dominant frequencies") {
    const auto hi = decode_pattern(render_pattern_signal({Shape::Cube, VibrationLevel::High}, Texture::Food));
    const auto lo = decode_pattern(render_pattern_signal({Shape::Cube, VibrationLevel::Low}, Texture::Food));
    CHECK(hi.dominant_frequency_hz > lo.dominant_frequency_hz);
    CHECK(lo.dominant_frequency_hz > 0.0);
  }

  TEST_CASE("flat zero signal is ambiguous with no vibration") {
    PatternSignal s;
    s.left.assign(kPatternSamples, {0, 0, 0});
    s.right.assign(kPatternSamples, {0, 0, 0});
    const auto d = decode_pattern(s);
    CHECK(d.shape_ambiguous());
    CHECK(d.vibration == VibrationLevel::Null);
    CHECK(d.texture == Texture::Food);
  }

  TEST_CASE("wrong rate or length is rejected") {
    auto s = render_pattern_signal({Shape::Sphere, VibrationLevel::Low}, Texture::Food);
    auto bad = s;
    bad.sample_rate_hz = 50.0;
    CHECK_THROWS_AS(decode_pattern(bad), InputError);
    bad = s;
    bad.left.pop_back();
    CHECK_THROWS_AS(decode_pattern(bad), InputError);
    bad = s;
    bad.right.push_back({0, 0, 0});
    CHECK_THROWS_AS(decode_pattern(bad), InputError);
  }

  TEST_CASE("texture thresholds") {
    CHECK(decode_texture(0.0) == Texture::Food);
    CHECK(decode_texture(0.45) == Texture::Food);
    CHECK(decode_texture(0.6) == Texture::Other);
    CHECK(decode_texture(0.75) == Texture::Plastic);
    CHECK(decode_texture(1.0) == Texture::Plastic);
  }

  TEST_CASE("rendered extensions stay within the linkage range") {
    for (const auto& p : all_haptic_patterns()) {
      const auto s = render_pattern_signal(p, Texture::Food);
      REQUIRE(s.left.size() == kPatternSamples);
      for (std::size_t i = 0; i < kPatternSamples; ++i) {
        for (int k = 0; k < 3; ++k) {
          CHECK(s.left[i][k] >= 0.0);
          CHECK(s.left[i][k] <= 1.0);
          CHECK(s.right[i][k] == s.left[i][k]);
        }
      }
    }
  }
}
