#include <doctest.h>

#include <cmath>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/render.hpp"
#include "hapticdrone/rng.hpp"

using namespace hapticdrone;
using namespace hapticdrone::policy;

namespace {

sim::WorldState world_with(std::vector<VirtualObject> objects, Vec3 drone = {0, 0, 1}) {
  sim::SceneConfig s;
  s.drone_start = drone;
  s.objects = std::move(objects);
  return sim::spawn(s, {});
}

Observation observe(const sim::WorldState& w, std::string instruction) {
  return {sim::render_topdown(w, sim::FrameView::Real), sim::render_topdown(w, sim::FrameView::VR),
          std::move(instruction), 0};
}

}  // namespace

TEST_SUITE("policy") {
  TEST_CASE("instruction grammar") {
    CHECK(parse_instruction("Fly to the Sphere") == TargetSelector{ByShape{Shape::Sphere}});
    CHECK(parse_instruction("fly to the left object") == TargetSelector{Relative{Side::Left}});
    CHECK(parse_instruction("  touch   the PLASTIC object ") ==
          TargetSelector{ByTexture{Texture::Plastic}});
    CHECK(parse_instruction("follow the cone") == TargetSelector{Follow{ByShape{Shape::Cone}}});
    CHECK(parse_instruction("follow the food") == TargetSelector{Follow{ByTexture{Texture::Food}}});
    try {
      (void)parse_instruction("do a barrel roll");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("fly to the") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_instruction(""), ParseError);
  }

  TEST_CASE("canonical instruction text parses back") {
    const std::vector<TargetSelector> all{
        ByShape{Shape::Cube},     ByTexture{Texture::Other},          Relative{Side::Right},
        Follow{ByShape{Shape::Sphere}}, Follow{ByTexture{Texture::Plastic}}};
    for (const auto& sel : all) CHECK(parse_instruction(instruction_for(sel)) == sel);
  }

  TEST_CASE("target resolution") {
    const auto w = world_with({{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2},
                               {Shape::Cube, Texture::Plastic, {-1, 1, 1}, 0.2}});
    CHECK(resolve_target(ByShape{Shape::Sphere}, w) == 0);
    CHECK(resolve_target(Relative{Side::Right}, w) == 0);
    CHECK(resolve_target(Relative{Side::Left}, w) == 1);
    CHECK(resolve_target(Follow{ByTexture{Texture::Plastic}}, w) == 1);
    CHECK_THROWS_AS(resolve_target(ByTexture{Texture::Other}, w), ResolutionError);
    CHECK_THROWS_AS(resolve_target(ByShape{Shape::Cube}, world_with({})), ResolutionError);
  }

  TEST_CASE("several matches resolve to the nearest, then the smallest index") {
    auto w = world_with({{Shape::Cube, Texture::Food, {2, 0, 1}, 0.2},
                         {Shape::Cube, Texture::Food, {-0.5, 0, 1}, 0.2},
                         {Shape::Cube, Texture::Food, {0.5, 0, 1}, 0.2}});
    CHECK(resolve_target(ByShape{Shape::Cube}, w) == 1);
    const auto tie = world_with({{Shape::Cone, Texture::Food, {1, 1, 1}, 0.2},
                                 {Shape::Cone, Texture::Food, {1, 0, 1}, 0.2},
                                 {Shape::Cone, Texture::Food, {1, -1, 1}, 0.2}});
    CHECK(resolve_target(Relative{Side::Right}, tie) == 2);  // equal x: smaller y wins
  }

  TEST_CASE("oracle velocity examples") {
    const auto w = world_with({{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2}});
    const auto a = oracle_act(w, ByShape{Shape::Sphere}, {}, 0.0);
    CHECK(a.vx == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(a.vy == doctest::Approx(-0.70711).epsilon(1e-5));
    CHECK(a.vz == 0.0);
    CHECK(a.haptic_direction() == Vec3::Zero());
    CHECK(a.hv == 0.0);
  }

  TEST_CASE("oracle haptics at the target center and on contact") {
    auto w = world_with({{Shape::Sphere, Texture::Plastic, {1, -1, 1}, 0.2}}, {1, -1, 1});
    auto a = oracle_act(w, ByShape{Shape::Sphere}, {}, 0.0);
    CHECK(a.velocity() == Vec3::Zero());
    CHECK(a.haptic_direction() == Vec3(0, 0, -1));
    CHECK(a.hv == 0.9);

    w = world_with({{Shape::Sphere, Texture::Other, {1, -1, 1}, 0.2}}, {0.75, -1, 1});
    a = oracle_act(w, ByShape{Shape::Sphere}, {}, 0.0);
    CHECK(a.hx == doctest::Approx(1.0));
    CHECK(a.hy == doctest::Approx(0.0));
    CHECK(a.hz == doctest::Approx(0.0));
    CHECK(a.hv == 0.6);
  }

  TEST_CASE("no haptics when touching a non-target object") {
    const auto w = world_with({{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2},
                               {Shape::Cube, Texture::Plastic, {0, 0, 1}, 0.2}});
    const auto a = oracle_act(w, ByShape{Shape::Sphere}, {}, 0.0);
    CHECK(a.hv == 0.0);
  }

  TEST_CASE("oracle properties on seeded states") {
    Rng rng(17);
    const OracleConfig cfg;
    for (int i = 0; i < 2000; ++i) {
      const Vec3 drone(rng.uniform(-3, 3), rng.uniform(-1.5, 1.5), rng.uniform(0.3, 2.4));
      const Vec3 target(rng.uniform(-3, 3), rng.uniform(-1.5, 1.5), 1.0);
      auto w = world_with({{Shape::Cone, Texture::Food, target, rng.uniform(0.1, 0.5)}}, drone);
      const auto a = oracle_act(w, ByShape{Shape::Cone}, cfg, 0.0);
      CHECK(a.velocity().norm() <= cfg.v_clamp + 1e-12);
      CHECK(oracle_act(w, ByShape{Shape::Cone}, cfg, 0.0) == a);
      if (a.hv > 0.0) CHECK(sim::contact_query(w)->in_contact);
    }
  }

  TEST_CASE("oracle policy needs privileged state") {
    OraclePolicy p;
    const auto w = world_with({{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2}});
    const auto obs = observe(w, "fly to the sphere");
    CHECK_THROWS_AS(p.act(obs, nullptr), InputError);
    CHECK(p.act(obs, &w) == oracle_act(w, ByShape{Shape::Sphere}, {}, 0.0));
    ZeroPolicy z;
    CHECK(z.act(obs, nullptr) == ActionVector{});
  }

  TEST_CASE("oracle closes the loop from a 5x5 grid of starts") {
    const sim::SimConfig cfg;
    const Vec3 target(1, -1, 1);
    OraclePolicy oracle;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const Vec3 start(-3.1 + 6.2 * i / 4.0, -1.5 + 3.0 * j / 4.0, 1.0);
        auto w = world_with({{Shape::Sphere, Texture::Food, target, 0.2}}, start);
        for (int k = 0; k < 50; ++k) {  // 10 s
          Observation obs;
          obs.instruction = "fly to the sphere";
          w = sim::step_control(w, oracle.act(obs, &w), cfg).first;
        }
        worst = std::max(worst, (w.drone.position - target).norm());
      }
    }
    CHECK(worst < 0.1);
  }

  TEST_CASE("perception recovers objects and the drone from pixels") {
    const auto w = world_with({{Shape::Cube, Texture::Food, {1, -1, 1}, 0.2},
                               {Shape::Sphere, Texture::Plastic, {-1.5, 0.8, 1}, 0.25},
                               {Shape::Cone, Texture::Other, {2.2, 0.9, 1}, 0.3}},
                              {-0.4, 0.3, 1});
    const auto obs = observe(w, "fly to the cube");
    const auto seen = perceive(obs.real_frame, obs.vr_frame);
    REQUIRE(seen.drone_xy);
    CHECK((*seen.drone_xy - Vec2(-0.4, 0.3)).norm() < 0.01);
    REQUIRE(seen.objects.size() == 3);
    for (const auto& truth : w.objects) {
      bool found = false;
      for (const auto& p : seen.objects) {
        if (p.shape == truth.shape && p.texture == truth.texture) {
          found = true;
          CHECK((p.position - truth.position.head<2>()).norm() < 0.02);
          CHECK(p.size == doctest::Approx(truth.size).epsilon(0.1));
        }
      }
      CHECK(found);
    }
  }

  TEST_CASE("perception classifies shapes across sizes") {
    for (double size : {0.1, 0.15, 0.2, 0.3, 0.4}) {
      for (Shape s : kAllShapes) {
        const auto w = world_with({{s, Texture::Food, {0.5, 0.5, 1}, size}});
        const auto obs = observe(w, "fly to the cube");
        const auto seen = perceive(obs.real_frame, obs.vr_frame);
        REQUIRE(seen.objects.size() == 1);
        CHECK(seen.objects[0].shape == s);
      }
    }
  }

  TEST_CASE("vision oracle acts from pixels alone") {
    VisionOraclePolicy vision;
    const auto w = world_with({{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2}});
    const auto a = vision.act(observe(w, "fly to the sphere"), nullptr);
    CHECK(a.vx == doctest::Approx(0.70711).epsilon(1e-3));
    CHECK(a.vy == doctest::Approx(-0.70711).epsilon(1e-3));
    CHECK(a.vz == 0.0);
    // Nothing matching in view: hover.
    CHECK(vision.act(observe(w, "fly to the cube"), nullptr) == ActionVector{});
    CHECK_THROWS_AS(vision.act(observe(w, "sing"), nullptr), ParseError);
  }

  TEST_CASE("oracle config validation") {
    OracleConfig c;
    c.kp = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.v_clamp = 2.0;
    CHECK_THROWS_AS(c.validate(1.0), ValidationError);
  }
}
