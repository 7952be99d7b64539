#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/flight_suite.hpp"

using namespace hapticdrone;
using namespace hapticdrone::eval;

namespace {

const std::vector<Vec3> kPoses(kReferenceTargets.begin(), kReferenceTargets.end());

class ThrowingPolicy final : public policy::Policy {
 public:
  std::string name() const override { return "throwing"; }
  ActionVector act(const Observation&, const sim::WorldState*) override {
    throw ProtocolError("link down");
  }
};

bool resolves_to_target(const GeneralizationCase& c) {
  const auto w = sim::spawn(c.scene, {});
  return policy::resolve_target(policy::parse_instruction(c.instruction), w) == c.target_index;
}

}  // namespace

TEST_SUITE("flight_suite") {
  TEST_CASE("oracle clears the reference targets") {
    policy::OraclePolicy oracle;
    SuiteConfig cfg;
    cfg.seed = 7;
    const auto r = run_flight_suite(oracle, kPoses, 10, cfg);
    REQUIRE(r.trials.size() == 30);
    CHECK(r.overall.total == 30);
    CHECK(r.overall.success_rate >= 0.9);
    for (const auto& t : r.trials) {
      REQUIRE(t.outcome.reach_time);
      CHECK(*t.outcome.reach_time < 40.0);
    }
    REQUIRE(r.per_pose.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.per_pose[i].pose == kPoses[i]);
    CHECK(r.overall.pose_error_mean);
    CHECK(r.overall.pose_error_stderr);
  }

  TEST_CASE("zero policy never succeeds") {
    policy::ZeroPolicy zero;
    const auto r = run_flight_suite(zero, kPoses, 2, {});
    CHECK(r.overall.successes == 0);
    CHECK(r.overall.success_rate == 0.0);
  }

  TEST_CASE("starts are seeded and jittered") {
    SuiteConfig cfg;
    std::set<std::pair<double, double>> seen;
    for (std::size_t k = 0; k < 20; ++k) {
      const auto s = trial_start(cfg, trial_seed(1, 0, k));
      CHECK(std::abs(s.x() - cfg.start_center.x()) <= cfg.start_jitter);
      CHECK(std::abs(s.y() - cfg.start_center.y()) <= cfg.start_jitter);
      CHECK(s.z() == cfg.start_center.z());
      seen.insert({s.x(), s.y()});
    }
    CHECK(seen.size() == 20);
    CHECK(trial_start(cfg, trial_seed(1, 0, 3)) == trial_start(cfg, trial_seed(1, 0, 3)));
    CHECK(trial_seed(1, 0, 3) != trial_seed(1, 1, 3));
  }

  TEST_CASE("suite input validation") {
    policy::ZeroPolicy zero;
    CHECK_THROWS_AS(run_flight_suite(zero, {}, 1, {}), InputError);
    CHECK_THROWS_AS(run_flight_suite(zero, kPoses, 0, {}), InputError);
    CHECK_THROWS_AS(run_flight_suite(zero, {Vec3(9, 0, 1)}, 1, {}), InputError);
  }

  TEST_CASE("policy errors end the trial as fail") {
    ThrowingPolicy p;
    const auto r = run_flight_suite(p, {kPoses[0]}, 2, {});
    for (const auto& t : r.trials) {
      CHECK(t.outcome.outcome == OutcomeClass::Fail);
      REQUIRE(t.failure);
      CHECK(t.failure->find("link down") != std::string::npos);
    }
  }

  TEST_CASE("reports") {
    policy::OraclePolicy oracle;
    const auto r = run_flight_suite(oracle, kPoses, 2, {});
    const auto j = nlohmann::json::parse(suite_report_json(r));
    CHECK(j["policy"] == "oracle");
    CHECK(j.contains("overall"));
    CHECK(j["per_pose"].size() == 3);
    const auto csv = suite_summary_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header, 3 poses, overall
    const auto traj = trajectories_csv(r);
    CHECK(traj.rfind("pose,trial,t,x,y,outcome\n", 0) == 0);
    std::size_t rows = 0;
    for (const auto& t : r.trials) rows += t.trajectory.size();
    CHECK(static_cast<std::size_t>(std::count(traj.begin(), traj.end(), '\n')) == rows + 1);
  }

  TEST_CASE("axis names and reference rates") {
    for (Axis a : kAllAxes) CHECK(axis_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(axis_from_string("temporal"), ParseError);
    CHECK(reference_rate(Axis::Visual) == 70.0);
    CHECK(reference_rate(Axis::Motion) == 54.4);
    CHECK(reference_rate(Axis::Physical) == 40.0);
    CHECK(reference_rate(Axis::Semantic) == 35.0);
  }

  TEST_CASE("base cases cycle the reference targets") {
    SuiteConfig cfg;
    for (std::size_t k = 0; k < 6; ++k) {
      const auto c = base_case(cfg, k);
      REQUIRE(c.scene.objects.size() == 1);
      CHECK(c.scene.objects[0].position == kReferenceTargets[k % 3]);
      CHECK(c.instruction == cfg.instruction);
      CHECK(resolves_to_target(c));
    }
  }

  TEST_CASE("motion perturbation adds distant distractors") {
    const auto base = base_case({}, 0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto c = perturb_scene(Axis::Motion, base, seed);
      CHECK(c.scene.objects.size() >= 2);
      CHECK(c.scene.objects.size() <= 3);
      const auto& target = c.scene.objects[c.target_index];
      CHECK(target == base.scene.objects[0]);
      for (std::size_t i = 0; i < c.scene.objects.size(); ++i) {
        if (i == c.target_index) continue;
        CHECK((c.scene.objects[i].position - target.position).norm() >= 1.0);
        CHECK(c.scene.objects[i].shape != target.shape);
      }
      CHECK(resolves_to_target(c));
      CHECK(sim::scene_violations(c.scene, {}).empty());
    }
  }

  TEST_CASE("physical perturbation") {
    const auto base = base_case({}, 1);
    const auto c = perturb_physical(base, 2.0, false);
    CHECK(c.scene.objects[c.target_index].size == doctest::Approx(0.4));
    CHECK(c.scene.objects[c.target_index].texture == base.scene.objects[0].texture);
    const auto swapped = perturb_physical(base, 1.0, true);
    CHECK(swapped.scene.objects[0].texture != base.scene.objects[0].texture);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto p = perturb_scene(Axis::Physical, base, seed);
      const double f = p.scene.objects[p.target_index].size / base.scene.objects[0].size;
      CHECK(f >= 0.5 - 1e-12);
      CHECK(f <= 2.0 + 1e-12);
      CHECK(resolves_to_target(p));
    }
  }

  TEST_CASE("semantic perturbation rewrites the instruction") {
    const auto base = base_case({}, 2);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto c = perturb_scene(Axis::Semantic, base, seed);
      CHECK(c.instruction != base.instruction);
      const auto sel = policy::parse_instruction(c.instruction);
      CHECK((std::holds_alternative<policy::Relative>(sel) ||
             std::holds_alternative<policy::Follow>(sel)));
      CHECK(resolves_to_target(c));
    }
  }

  TEST_CASE("visual perturbation keeps the objects in place") {
    auto base = base_case({}, 0);
    base.scene.objects.push_back({Shape::Cube, Texture::Plastic, {-2, 1, 1}, 0.2});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto c = perturb_scene(Axis::Visual, base, seed);
      CHECK(c.scene.background != sim::BackgroundStyle::Default);
      CHECK(c.scene.objects.size() == base.scene.objects.size());
      CHECK(c.scene.objects[0] == base.scene.objects[0]);
      CHECK(c.scene.objects[1].position == base.scene.objects[1].position);
      CHECK(c.scene.objects[1].texture != base.scene.objects[1].texture);
      CHECK(resolves_to_target(c));
    }
  }

  TEST_CASE("perturbations are seeded") {
    const auto base = base_case({}, 0);
    for (Axis a : kAllAxes) {
      const auto x = perturb_scene(a, base, 11);
      const auto y = perturb_scene(a, base, 11);
      CHECK(x.scene == y.scene);
      CHECK(x.instruction == y.instruction);
    }
  }

  TEST_CASE("out-of-grammar instruction fails as a case") {
    policy::VisionOraclePolicy vision;
    auto c = base_case({}, 0);
    c.instruction = "hover majestically";
    const auto r = run_case(vision, c, {}, 3);
    CHECK(r.outcome.outcome == OutcomeClass::Fail);
    CHECK(r.failure);
  }

  TEST_CASE("generalization run with a privileged oracle") {
    policy::OraclePolicy oracle;
    const auto r = run_generalization(oracle, {kAllAxes.begin(), kAllAxes.end()}, 3, {});
    REQUIRE(r.axes.size() == 4);
    CHECK(r.base_rate == 1.0);
    for (const auto& a : r.axes) {
      CHECK(a.trials == 3);
      CHECK(a.cases.size() == 3);
      CHECK(a.reference_rate == reference_rate(a.axis));
    }
    // Recoloring does not move the target, so the oracle is unaffected.
    CHECK(r.axes[0].success_rate == r.base_rate);
    const auto j = nlohmann::json::parse(generalization_report_json(r));
    CHECK(j["axes"].size() == 4);
    const auto csv = generalization_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header, base, 4 axes
    CHECK_THROWS_AS(run_generalization(oracle, {Axis::Visual}, 0, {}), InputError);
  }
}
