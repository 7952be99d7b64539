#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/errors.hpp"
#include "hapticdrone/evaluation.hpp"
#include "hapticdrone/rng.hpp"
#include "hapticdrone/world.hpp"

using namespace hapticdrone;

namespace {

ActionVector random_action(Rng& rng) {
  return {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
          rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)};
}

}  // namespace

TEST_SUITE("core_model") {
  TEST_CASE("clamp_action examples") {
    CHECK(clamp_action({}) == ActionVector{});
    const ActionVector over{1.5, -2, 0, 0, 0, 0, 1.2};
    CHECK(clamp_action(over) == ActionVector{1.0, -1.0, 0, 0, 0, 0, 1.0});
    const ActionVector ok{0.3, -0.7, 0.1, 0.5, 0, -0.5, 0.4};
    CHECK(clamp_action(ok) == ok);
    CHECK(clamp_action({0, 0, 0, 0, 0, 0, -0.5}).hv == 0.0);
  }

  TEST_CASE("clamp_action rejects non-finite components by name") {
    ActionVector a;
    a.hy = std::numeric_limits<double>::quiet_NaN();
    try {
      (void)clamp_action(a);
      FAIL("expected RangeError");
    } catch (const RangeError& e) {
      CHECK(std::string(e.what()).find("hy") != std::string::npos);
    }
    a = {};
    a.vx = INFINITY;
    CHECK_THROWS_AS(clamp_action(a), RangeError);
  }

  TEST_CASE("clamp_action is idempotent on seeded vectors") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      ActionVector a{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3),
                     rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const auto once = clamp_action(a);
      CHECK(action_in_range(once));
      CHECK(clamp_action(once) == once);
    }
  }

  TEST_CASE("action list order is vx vy vz hx hy hz hv") {
    const ActionVector a{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    const auto xs = action_to_list(a);
    const std::array<double, 7> expected{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    CHECK(xs == expected);
    const std::array<double, 7> zeros{};
    CHECK(parse_action(zeros) == ActionVector{});
  }

  TEST_CASE("parse_action roundtrip is bit-identical on 1000 seeded vectors") {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_action(rng);
      const auto list = action_to_list(a);
      const auto b = parse_action(list);
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
  }

  TEST_CASE("parse_action is strict") {
    const std::vector<double> six(6, 0.0);
    CHECK_THROWS_AS(parse_action(six), ParseError);
    const std::vector<double> eight(8, 0.0);
    CHECK_THROWS_AS(parse_action(eight), ParseError);
    std::vector<double> xs(7, 0.0);
    xs[0] = 1.5;
    CHECK_THROWS_AS(parse_action(xs), ParseError);
    xs[0] = 0.0;
    xs[6] = -0.1;
    CHECK_THROWS_AS(parse_action(xs), ParseError);
    xs[6] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(parse_action(xs), ParseError);
    xs = {1, -1, 1, -1, 1, -1, 1};
    CHECK_NOTHROW(parse_action(xs));
  }

  TEST_CASE("enum codes match the golden file") {
    std::ifstream in(HD_SOURCE_DIR "/tests/golden/enum_codes.json");
    REQUIRE(in);
    const auto golden = nlohmann::json::parse(in);
    for (Shape s : kAllShapes) CHECK(golden["shape"][std::string(to_string(s))] == code(s));
    for (Texture t : kAllTextures) CHECK(golden["texture"][std::string(to_string(t))] == code(t));
    for (VibrationLevel v : kAllVibrationLevels) {
      CHECK(golden["vibration"][std::string(to_string(v))] == code(v));
    }
    for (auto b : {sim::BackgroundStyle::Default, sim::BackgroundStyle::AltColor,
                   sim::BackgroundStyle::Cluttered}) {
      CHECK(golden["background"][std::string(sim::to_string(b))] == static_cast<int>(b));
    }
    for (auto o : {eval::OutcomeClass::Success, eval::OutcomeClass::Partial, eval::OutcomeClass::Fail}) {
      CHECK(golden["outcome"][std::string(eval::to_string(o))] == static_cast<int>(o));
    }
  }

  TEST_CASE("enum names and codes roundtrip") {
    for (Shape s : kAllShapes) {
      CHECK(shape_from_string(to_string(s)) == s);
      CHECK(shape_from_code(code(s)) == s);
    }
    for (Texture t : kAllTextures) CHECK(texture_from_code(code(t)) == t);
    for (VibrationLevel v : kAllVibrationLevels) CHECK(vibration_from_string(to_string(v)) == v);
    CHECK(shape_from_string("SPHERE") == Shape::Sphere);
    CHECK_THROWS_AS(shape_from_string("pyramid"), ParseError);
    CHECK_THROWS_AS(texture_from_code(3), ParseError);
  }

  TEST_CASE("nine distinct haptic patterns") {
    const auto all = all_haptic_patterns();
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) CHECK_FALSE(all[i] == all[j]);
    }
  }

  TEST_CASE("frame raster layout") {
    FrameRaster f(Rgb{1, 2, 3});
    CHECK(f.bytes().size() == 640u * 320u * 3u);
    f.set(639, 319, {9, 8, 7});
    CHECK(f.data()[f.data().size() - 3] == 9);
    f.set(1, 0, {5, 5, 5});
    CHECK(f.data()[3] == 5);
    f.plot(-1, 0, {0, 0, 0});
    f.plot(640, 0, {0, 0, 0});
    CHECK(f.at(0, 0) == Rgb{1, 2, 3});
    CHECK_THROWS_AS(FrameRaster(std::vector<std::uint8_t>(100)), InputError);
  }

  TEST_CASE("observation needs an instruction") {
    Observation obs;
    CHECK_THROWS_AS(validate_observation(obs), InputError);
    obs.instruction = "fly to the cube";
    CHECK_NOTHROW(validate_observation(obs));
  }
}
