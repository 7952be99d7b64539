// hapticdrone: command-line entry points for simulation, dataset recording,
// policy serving and evaluation.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "hapticdrone/closed_loop.hpp"
#include "hapticdrone/confusion.hpp"
#include "hapticdrone/dataset.hpp"
#include "hapticdrone/errors.hpp"
#include "hapticdrone/flight_suite.hpp"
#include "hapticdrone/linkage.hpp"
#include "hapticdrone/patterns.hpp"
#include "hapticdrone/policy.hpp"
#include "hapticdrone/policy_server.hpp"
#include "hapticdrone/remote_policy.hpp"
#include "hapticdrone/scene_io.hpp"
#include "hapticdrone/sim_service.hpp"

namespace hd = hapticdrone;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

const CLI::Validator kPolicySpec(
    [](std::string& s) -> std::string {
      if (s == "oracle" || s == "zero" || s == "vision" || s.rfind("remote:", 0) == 0) return {};
      return "expected oracle, vision, zero or remote:URL";
    },
    "POLICY");

const CLI::Validator kServedPolicySpec(
    [](std::string& s) -> std::string {
      return s == "oracle" || s == "zero" ? std::string() : std::string("expected oracle or zero");
    },
    "oracle|zero");

const CLI::Validator kAddress(
    [](std::string& s) -> std::string {
      try {
        (void)hd::service::parse_bind_address(s);
        return {};
      } catch (const hd::Error& e) {
        return e.what();
      }
    },
    "HOST:PORT");

// "oracle" is the privileged controller in-process; "vision" is its
// observation-only counterpart.
std::unique_ptr<hd::policy::Policy> make_policy(const std::string& spec) {
  if (spec == "oracle") return std::make_unique<hd::policy::OraclePolicy>();
  if (spec == "vision") return std::make_unique<hd::policy::VisionOraclePolicy>();
  if (spec == "zero") return std::make_unique<hd::policy::ZeroPolicy>();
  return std::make_unique<hd::policy::RemotePolicy>(spec.substr(std::string("remote:").size()));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw hd::IoError("cannot write " + path);
}

// Fills options of `sub` that were not given on the command line from the
// JSON object in `path`. Keys are the long flag names without dashes.
void merge_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw CLI::ValidationError("--config", path + " is not a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "config") continue;
    auto* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw CLI::ValidationError("--config", "unknown key '" + key + "' in " + path);
    if (opt->count() > 0) continue;
    auto as_text = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(as_text(v));
    } else {
      opt->add_result(as_text(value));
    }
    opt->run_callback();
  }
}

void print_trials_summary(const hd::eval::FlightSuiteReport& r) {
  for (const auto& p : r.per_pose) {
    fmt::print("target [{:g}, {:g}, {:g}]: {}\n", p.pose.x(), p.pose.y(), p.pose.z(),
               hd::eval::format_summary(p.summary));
  }
  fmt::print("overall: {}\n", hd::eval::format_summary(r.overall));
}

struct SimulateArgs {
  std::string scene;
  std::string instruction = "fly to the sphere";
  std::string policy = "oracle";
  std::uint64_t seed = 0;
  bool headless = false;
  std::string serve;
  std::string trajectory;
};

int cmd_simulate(const SimulateArgs& a) {
  hd::sim::SceneConfig scene;
  if (a.scene.empty()) {
    scene.objects.push_back({hd::Shape::Sphere, hd::Texture::Food, {1.0, -1.0, 1.0}, 0.2});
  } else {
    scene = hd::sim::load_scene_file(a.scene);
  }
  hd::service::LoopOptions opts;
  opts.sim.seed = a.seed;
  opts.live = !a.headless;

  hd::service::LoopResult result;
  std::shared_ptr<hd::policy::Policy> policy = make_policy(a.policy);
  if (!a.serve.empty()) {
    hd::service::SimServiceOptions so;
    so.exit_when_finished = true;
    so.tick_period = a.headless ? std::chrono::milliseconds(0)
                                : std::chrono::milliseconds(static_cast<int>(opts.sim.dt_control * 1000));
    hd::service::SimService service(scene, a.instruction, policy, opts, so);
    const int port = service.start(hd::service::parse_bind_address(a.serve));
    fmt::print("sim service on ws://127.0.0.1:{}/ws\n", port);
    std::fflush(stdout);
    service.wait();
    result = service.result();
    if (const auto err = service.last_error(); !err.empty()) {
      service.stop();
      throw hd::Error("policy failed: " + err);
    }
    service.stop();
  } else {
    result = hd::service::run_closed_loop(scene, *policy, a.instruction, opts);
  }

  std::string status = std::string(hd::eval::to_string(result.outcome.outcome));
  if (result.outcome.reach_time) status += fmt::format(", reach time {:.1f} s", *result.outcome.reach_time);
  if (!result.trajectory.empty()) {
    const auto& last = result.trajectory.back();
    status += fmt::format(", {} ticks, final position [{:.3f}, {:.3f}, {:.3f}]",
                          result.trajectory.size(), last.position.x(), last.position.y(),
                          last.position.z());
  }
  fmt::print("outcome: {}\n", status);
  if (!a.trajectory.empty()) {
    std::string csv = "t,x,y,z\n";
    for (const auto& s : result.trajectory) {
      csv += fmt::format("{:.2f},{:.6f},{:.6f},{:.6f}\n", s.sim_time, s.position.x(),
                         s.position.y(), s.position.z());
    }
    write_file(a.trajectory, csv);
  }
  return kExitOk;
}

struct RecordArgs {
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t variations = hd::dataset::kVariations;
};

int cmd_record(const RecordArgs& a) {
  hd::dataset::GenerateOptions opts;
  opts.jobs = a.jobs;
  opts.variations = a.variations;
  const auto m = hd::dataset::generate_dataset(a.out, a.seed, opts);
  fmt::print("{} episodes, {} steps, {} failures\n", m.episode_count, m.total_steps,
             m.failures.size());
  for (const auto& f : m.failures) fmt::print("  {}: {}\n", f.episode_id, f.reason);
  return m.failures.empty() ? kExitOk : kExitValidation;
}

int cmd_validate(const std::string& dir) {
  const auto report = hd::dataset::validate_dataset(dir);
  for (const auto& v : report.violations) fmt::print("{}\n", hd::dataset::format_violation(v));
  fmt::print("{} episodes, {} steps, {} violations\n", report.episodes, report.steps,
             report.violations.size());
  return report.ok() ? kExitOk : kExitValidation;
}

int cmd_serve_policy(const std::string& policy_name, const std::string& bind) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by server threads

  std::shared_ptr<hd::policy::Policy> policy;
  if (policy_name == "oracle") {
    policy = std::make_shared<hd::policy::VisionOraclePolicy>();
  } else {
    policy = std::make_shared<hd::policy::ZeroPolicy>();
  }
  hd::service::PolicyServer server(policy->name(), hd::service::serve_adapter(policy));
  server.start(hd::service::parse_bind_address(bind));
  fmt::print("serving policy '{}' at {}\n", policy->name(), server.url());
  std::fflush(stdout);
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return kExitOk;
}

struct FlightArgs {
  std::size_t trials = 10;
  std::string policy = "oracle";
  std::uint64_t seed = 0;
  std::string report;
  std::string csv;
  std::string trajectories;
};

int cmd_eval_flight(const FlightArgs& a) {
  auto policy = make_policy(a.policy);
  hd::eval::SuiteConfig cfg;
  cfg.seed = a.seed;
  const std::vector<hd::Vec3> poses(hd::eval::kReferenceTargets.begin(),
                                    hd::eval::kReferenceTargets.end());
  const auto r = hd::eval::run_flight_suite(*policy, poses, a.trials, cfg);
  print_trials_summary(r);
  fmt::print("reference: success rate 56.7%; reach time mean 21.3 s (min 11.9 s, max 35.7 s); "
             "hover pose error 0.24 m +/- 0.08 m (s.e.)\n");
  if (!a.report.empty()) write_file(a.report, hd::eval::suite_report_json(r));
  if (!a.csv.empty()) write_file(a.csv, hd::eval::suite_summary_csv(r));
  if (!a.trajectories.empty()) write_file(a.trajectories, hd::eval::trajectories_csv(r));
  return kExitOk;
}

struct GeneralizationArgs {
  std::vector<std::string> axes{"visual", "motion", "physical", "semantic"};
  std::size_t trials = 10;
  std::string policy = "oracle";
  std::uint64_t seed = 0;
  std::string report;
  std::string csv;
};

int cmd_eval_generalization(const GeneralizationArgs& a) {
  std::vector<hd::eval::Axis> axes;
  for (const auto& name : a.axes) axes.push_back(hd::eval::axis_from_string(name));
  auto policy = make_policy(a.policy);
  hd::eval::SuiteConfig cfg;
  cfg.seed = a.seed;
  const auto r = hd::eval::run_generalization(*policy, axes, a.trials, cfg);
  fmt::print("{:<10} {:>8} {:>10} {:>12}\n", "axis", "trials", "success", "reference");
  fmt::print("{:<10} {:>8} {:>9.1f}% {:>12}\n", "base", r.trials_per_axis, 100.0 * r.base_rate, "-");
  for (const auto& ax : r.axes) {
    fmt::print("{:<10} {:>8} {:>9.1f}% {:>11.1f}%\n", hd::eval::to_string(ax.axis), ax.trials,
               100.0 * ax.success_rate, ax.reference_rate);
  }
  if (!a.report.empty()) write_file(a.report, hd::eval::generalization_report_json(r));
  if (!a.csv.empty()) write_file(a.csv, hd::eval::generalization_csv(r));
  return kExitOk;
}

int cmd_analyze_confusion(const std::string& path) {
  const auto full = hd::eval::load_confusion(path);
  const auto agg = hd::eval::aggregate_confusion(full);
  auto diagonal = [](const hd::eval::ConfusionMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
      out += fmt::format("{}{} {:.2f}", i ? ", " : "", m.labels[i], m.rows[i][i]);
    }
    return out;
  };
  fmt::print("full matrix ({} patterns):\n{}\n", full.size(), hd::eval::format_matrix(full));
  fmt::print("shape matrix:\n{}\n", hd::eval::format_matrix(agg.shape));
  fmt::print("vibration matrix:\n{}\n", hd::eval::format_matrix(agg.vibration));
  fmt::print("shape diagonal: {}\n", diagonal(agg.shape));
  fmt::print("vibration diagonal: {}\n", diagonal(agg.vibration));
  fmt::print("diagonal means: full {:.3f}, shape {:.3f}, vibration {:.3f}\n",
             agg.full_diagonal_mean, agg.shape_diagonal_mean, agg.vibration_diagonal_mean);
  return kExitOk;
}

struct PatternArgs {
  std::string shape;
  std::string vibration;
  std::string texture = "food";
  std::string out;
};

int cmd_render_pattern(const PatternArgs& a) {
  const hd::HapticPattern pattern{hd::shape_from_string(a.shape),
                                  hd::vibration_from_string(a.vibration)};
  const auto texture = hd::texture_from_string(a.texture);
  const auto signal = hd::eval::render_pattern_signal(pattern, texture);
  const hd::linkage::LinkageDriver driver;

  std::string csv = "t,left_0,left_1,left_2,right_0,right_1,right_2,hv";
  for (int k = 0; k < hd::linkage::LinkageDriver::kSlotsPerArray; ++k) {
    csv += fmt::format(",theta1_{0},theta2_{0}", k);
  }
  csv += "\n";
  for (std::size_t i = 0; i < signal.left.size(); ++i) {
    const auto& l = signal.left[i];
    const auto& r = signal.right[i];
    csv += fmt::format("{:.2f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f}",
                       double(i) / signal.sample_rate_hz, l[0], l[1], l[2], r[0], r[1], r[2],
                       signal.hv);
    for (int k = 0; k < hd::linkage::LinkageDriver::kSlotsPerArray; ++k) {
      const auto ang = driver.extension_to_angles(k, l[static_cast<std::size_t>(k)]);
      csv += fmt::format(",{:.6f},{:.6f}", ang.theta1, ang.theta2);
    }
    csv += "\n";
  }
  write_file(a.out, csv);

  const auto d = hd::eval::decode_pattern(signal);
  fmt::print("rendered {}/{} ({}) to {}; decoded {}/{} ({}), dominant {:.0f} Hz\n",
             hd::to_string(pattern.shape), hd::to_string(pattern.vibration),
             hd::to_string(texture), a.out,
             d.shape ? std::string(hd::to_string(*d.shape)) : std::string("ambiguous"),
             hd::to_string(d.vibration), hd::to_string(d.texture), d.dominant_frequency_hz);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drone navigation with haptic rendering: simulation, dataset and evaluation tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hapticdrone 0.1.0");

  std::string config;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON file of option defaults; flags override it")
        ->check(CLI::ExistingFile);
  };

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop flight");
  simulate->add_option("--scene", sim_args.scene, "Scene JSON file")->check(CLI::ExistingFile);
  simulate->add_option("--instruction", sim_args.instruction, "Navigation instruction");
  simulate->add_option("--policy", sim_args.policy, "oracle, vision, zero or remote:URL")
      ->check(kPolicySpec);
  simulate->add_option("--seed", sim_args.seed, "Simulation seed");
  simulate->add_flag("--headless", sim_args.headless, "Run unthrottled");
  simulate->add_option("--serve", sim_args.serve, "Attach the console service at HOST:PORT")
      ->check(kAddress);
  simulate->add_option("--trajectory", sim_args.trajectory, "Write t,x,y,z CSV");
  add_config(simulate);

  RecordArgs rec_args;
  auto* record = app.add_subcommand("record-dataset", "Generate the 450-episode dataset");
  record->add_option("--out", rec_args.out, "Empty output directory");
  record->add_option("--seed", rec_args.seed, "Base seed");
  record->add_option("--jobs", rec_args.jobs, "Parallel episode writers")
      ->check(CLI::Range(1u, 256u));
  record->add_option("--variations", rec_args.variations, "Start/placement variations per cell")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
  add_config(record);

  std::string validate_dir;
  auto* validate = app.add_subcommand("validate-dataset", "Check a dataset tree");
  validate->add_option("--dir", validate_dir, "Dataset root");
  add_config(validate);

  std::string serve_policy = "oracle";
  std::string serve_bind = "127.0.0.1:8000";
  auto* serve = app.add_subcommand("serve-policy", "Serve a policy over HTTP");
  serve->add_option("--policy", serve_policy, "oracle or zero")->check(kServedPolicySpec);
  serve->add_option("--bind", serve_bind, "HOST:PORT")->check(kAddress);
  add_config(serve);

  FlightArgs flight_args;
  auto* flight = app.add_subcommand("eval-flight", "Flight suite on the three reference targets");
  flight->add_option("--trials", flight_args.trials, "Trials per target")
      ->check(CLI::PositiveNumber);
  flight->add_option("--policy", flight_args.policy, "oracle, vision, zero or remote:URL")
      ->check(kPolicySpec);
  flight->add_option("--seed", flight_args.seed, "Base seed");
  flight->add_option("--report", flight_args.report, "Write the JSON report");
  flight->add_option("--csv", flight_args.csv, "Write the summary CSV");
  flight->add_option("--trajectories", flight_args.trajectories, "Write pose,trial,t,x,y,outcome CSV");
  add_config(flight);

  GeneralizationArgs gen_args;
  auto* gen = app.add_subcommand("eval-generalization", "Four-axis generalization suite");
  gen->add_option("--axes", gen_args.axes, "visual,motion,physical,semantic")
      ->delimiter(',')
      ->check(CLI::IsMember({"visual", "motion", "physical", "semantic"}, CLI::ignore_case));
  gen->add_option("--trials", gen_args.trials, "Trials per axis")->check(CLI::PositiveNumber);
  gen->add_option("--policy", gen_args.policy, "oracle, vision, zero or remote:URL")
      ->check(kPolicySpec);
  gen->add_option("--seed", gen_args.seed, "Base seed");
  gen->add_option("--report", gen_args.report, "Write the JSON report");
  gen->add_option("--csv", gen_args.csv, "Write the per-axis CSV");
  add_config(gen);

  std::string matrix_path;
  auto* confusion = app.add_subcommand("analyze-confusion", "Marginalize a 9x9 confusion matrix");
  confusion->add_option("--matrix", matrix_path, "Matrix JSON file");
  add_config(confusion);

  PatternArgs pattern_args;
  auto* pattern = app.add_subcommand("render-pattern", "Render one haptic pattern to CSV");
  pattern->add_option("--shape", pattern_args.shape, "cube, sphere or cone")
      ->check(CLI::IsMember({"cube", "sphere", "cone"}, CLI::ignore_case));
  pattern->add_option("--vibration", pattern_args.vibration, "high, low or null")
      ->check(CLI::IsMember({"high", "low", "null"}, CLI::ignore_case));
  pattern->add_option("--texture", pattern_args.texture, "food, plastic or other")
      ->check(CLI::IsMember({"food", "plastic", "other"}, CLI::ignore_case));
  pattern->add_option("--out", pattern_args.out, "Output CSV");
  add_config(pattern);

  CLI::App* chosen = nullptr;
  try {
    app.parse(argc, argv);
    chosen = app.get_subcommands().front();
    if (!config.empty()) merge_config(chosen, config);
    auto need = [&](const std::string& flag) {
      if (chosen->get_option(flag)->count() == 0) throw CLI::RequiredError(flag);
    };
    if (chosen == record) need("--out");
    if (chosen == validate) need("--dir");
    if (chosen == confusion) need("--matrix");
    if (chosen == pattern) {
      need("--shape");
      need("--vibration");
      need("--out");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (chosen == simulate) return cmd_simulate(sim_args);
    if (chosen == record) return cmd_record(rec_args);
    if (chosen == validate) return cmd_validate(validate_dir);
    if (chosen == serve) return cmd_serve_policy(serve_policy, serve_bind);
    if (chosen == flight) return cmd_eval_flight(flight_args);
    if (chosen == gen) return cmd_eval_generalization(gen_args);
    if (chosen == confusion) return cmd_analyze_confusion(matrix_path);
    if (chosen == pattern) return cmd_render_pattern(pattern_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
