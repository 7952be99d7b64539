#include "hapticdrone/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "hapticdrone/closed_loop.hpp"
#include "hapticdrone/errors.hpp"
#include "hapticdrone/png_codec.hpp"
#include "hapticdrone/rng.hpp"
#include "json_io.hpp"

namespace hapticdrone::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetaName = "meta.json";
constexpr const char* kStepsName = "episode.jsonl";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json meta_to_json(const EpisodeMeta& m) {
  return {{"episode_id", m.episode_id},
          {"shape", to_string(m.shape)},
          {"texture", to_string(m.texture)},
          {"drone_start", json_io::vec(m.drone_start)},
          {"target_position", json_io::vec(m.target_position)},
          {"instruction", m.instruction},
          {"seed", m.seed},
          {"num_steps", m.num_steps},
          {"outcome", eval::to_string(m.outcome)}};
}

EpisodeMeta meta_from_json(const json& j) {
  EpisodeMeta m;
  m.episode_id = j.at("episode_id").get<std::string>();
  m.shape = shape_from_string(j.at("shape").get<std::string>());
  m.texture = texture_from_string(j.at("texture").get<std::string>());
  m.drone_start = json_io::to_vec3(j.at("drone_start"), "drone_start");
  m.target_position = json_io::to_vec3(j.at("target_position"), "target_position");
  m.instruction = j.at("instruction").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.num_steps = j.at("num_steps").get<std::size_t>();
  m.outcome = eval::outcome_from_string(j.at("outcome").get<std::string>());
  return m;
}

json step_to_json(const StepRecord& s) {
  return {{"step_index", s.step_index},
          {"is_first", s.is_first},
          {"is_last", s.is_last},
          {"is_terminal", s.is_terminal},
          {"observation",
           {{"real_frame", s.real_frame}, {"vr_frame", s.vr_frame}, {"instruction", s.instruction}}},
          {"action", s.action},
          {"drone_position", json_io::vec(s.drone_position)}};
}

StepRecord step_from_json(const json& j) {
  StepRecord s;
  s.step_index = j.at("step_index").get<std::size_t>();
  s.is_first = j.at("is_first").get<bool>();
  s.is_last = j.at("is_last").get<bool>();
  s.is_terminal = j.at("is_terminal").get<bool>();
  const auto& obs = j.at("observation");
  s.real_frame = obs.at("real_frame").get<std::string>();
  s.vr_frame = obs.at("vr_frame").get<std::string>();
  s.instruction = obs.at("instruction").get<std::string>();
  s.action = j.at("action").get<std::vector<double>>();
  s.drone_position = json_io::to_vec3(j.at("drone_position"), "drone_position");
  return s;
}

EpisodeMeta read_meta(const fs::path& dir) {
  const fs::path path = dir / kMetaName;
  if (!fs::is_regular_file(path)) throw FormatError("missing " + path.string());
  try {
    return meta_from_json(json::parse(read_text(path)));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Parses episode.jsonl; a bad line throws FormatError with its 1-based number.
std::vector<StepRecord> read_steps(const fs::path& dir) {
  const fs::path path = dir / kStepsName;
  if (!fs::is_regular_file(path)) throw FormatError("missing " + path.string());
  const std::string text = read_text(path);
  std::vector<StepRecord> steps;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? end : end - pos);
    pos = end == std::string::npos ? text.size() : end + 1;
    try {
      steps.push_back(step_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return steps;
}

json manifest_to_json(const DatasetManifest& m) {
  json failures = json::array();
  for (const auto& f : m.failures) {
    failures.push_back({{"episode_id", f.episode_id}, {"reason", f.reason}});
  }
  return {{"version", m.version},
          {"episode_count", m.episode_count},
          {"per_cell_counts", m.per_cell_counts},
          {"total_steps", m.total_steps},
          {"base_seed", m.base_seed},
          {"failures", failures}};
}

std::string instruction_for_cell(std::size_t variation, Shape s, Texture t) {
  return variation % 2 == 0 ? policy::instruction_for(policy::ByShape{s})
                            : policy::instruction_for(policy::ByTexture{t});
}

}  // namespace

std::string frame_name(std::size_t step, bool real) {
  return fmt::format("step_{:05}_{}.png", step, real ? "real" : "vr");
}

std::size_t cell_index(Shape s, Texture t) noexcept {
  return static_cast<std::size_t>(3 * code(s) + code(t));
}

std::string episode_id(std::size_t variation, Shape s, Texture t) {
  return fmt::format("ep{:03}_{}_{}", variation, to_string(s), to_string(t));
}

EpisodeMeta record_episode(const sim::WorldState& world, policy::Policy& policy,
                           const std::string& instruction, const RecordConfig& cfg,
                           const fs::path& out_dir, const std::string& id) {
  if (cfg.step_cap < 2) throw InputError("step cap must be >= 2");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  if (fs::exists(out_dir / kMetaName)) {
    throw IoError(out_dir.string() + " already holds an episode");
  }
  write_text(out_dir / kIncompleteMarker, "recording\n");

  const auto selector = policy::parse_instruction(instruction);
  const std::size_t target = policy::resolve_target(selector, world);

  service::LoopOptions opts;
  opts.sim = cfg.sim;
  opts.criteria = cfg.criteria;
  opts.target_index = target;
  opts.max_ticks = cfg.step_cap;
  policy.reset();
  service::ClosedLoop loop(world, instruction, policy, opts);

  std::vector<StepRecord> steps;
  // The VR frame only changes with the scene, so its encoding is reused.
  std::optional<FrameRaster> vr_raster;
  std::vector<std::uint8_t> vr_png;
  while (!loop.finished()) {
    const auto rec = loop.tick();
    StepRecord s;
    s.step_index = rec.step;
    s.real_frame = frame_name(rec.step, true);
    s.vr_frame = frame_name(rec.step, false);
    s.instruction = rec.observation.instruction;
    const auto a = action_to_list(rec.action);
    s.action.assign(a.begin(), a.end());
    s.drone_position = rec.position_before;
    png::write_file(out_dir / s.real_frame, png::encode(rec.observation.real_frame));
    if (!vr_raster || !(*vr_raster == rec.observation.vr_frame)) {
      vr_raster = rec.observation.vr_frame;
      vr_png = png::encode(*vr_raster);
    }
    png::write_file(out_dir / s.vr_frame, vr_png);
    steps.push_back(std::move(s));
  }
  steps.front().is_first = true;
  steps.back().is_last = true;
  steps.back().is_terminal = true;

  std::string lines;
  for (const auto& s : steps) lines += step_to_json(s).dump() + "\n";
  write_text(out_dir / kStepsName, lines);

  EpisodeMeta meta;
  meta.episode_id = id;
  meta.shape = world.objects[target].shape;
  meta.texture = world.objects[target].texture;
  meta.drone_start = world.drone.position;
  meta.target_position = world.objects[target].position;
  meta.instruction = instruction;
  meta.seed = cfg.sim.seed;
  meta.num_steps = steps.size();
  meta.outcome = loop.outcome().outcome;
  write_text(out_dir / kMetaName, meta_to_json(meta).dump(2) + "\n");
  fs::remove(out_dir / kIncompleteMarker, ec);
  if (ec) throw IoError("cannot remove marker in " + out_dir.string());
  return meta;
}

Variation make_variation(std::uint64_t base_seed, std::size_t index, std::size_t count) {
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * double(count))));
  const std::size_t rows = (count + cols - 1) / cols;
  const std::size_t c = index % cols;
  const std::size_t r = index / cols;
  Rng rng(mix_seed(base_seed, index));
  Variation v;
  v.drone_start = {-2.7 + 5.4 * (double(c) + 0.5) / double(cols) + rng.uniform(-0.1, 0.1),
                   -1.2 + 2.4 * (double(r) + 0.5) / double(rows) + rng.uniform(-0.1, 0.1),
                   rng.uniform(0.8, 1.2)};
  do {
    v.target = {rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0), 1.0};
  } while ((v.target - v.drone_start).norm() < 1.0);
  v.size = rng.uniform(0.15, 0.25);
  return v;
}

DatasetManifest generate_dataset(const fs::path& root, std::uint64_t base_seed,
                                 const GenerateOptions& opts) {
  if (fs::exists(root) && !fs::is_empty(root)) {
    throw InputError("dataset root " + root.string() + " is not empty");
  }
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  std::vector<Variation> variations;
  for (std::size_t v = 0; v < opts.variations; ++v) {
    variations.push_back(make_variation(base_seed, v, opts.variations));
  }
  const std::size_t total = opts.variations * kCells;
  std::vector<std::optional<EpisodeMeta>> metas(total);
  std::vector<std::string> errors(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    policy::OraclePolicy oracle;
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t v = i / kCells;
      const Shape shape = shape_from_code(static_cast<int>(i % kCells) / 3);
      const Texture texture = texture_from_code(static_cast<int>(i % kCells) % 3);
      const std::string id = episode_id(v, shape, texture);
      try {
        sim::SceneConfig scene;
        scene.drone_start = variations[v].drone_start;
        scene.objects.push_back({shape, texture, variations[v].target, variations[v].size});
        RecordConfig rc = opts.record;
        rc.sim.seed = mix_seed(base_seed, 1000 + i);
        const auto world = sim::spawn(scene, rc.sim);
        metas[i] = record_episode(world, oracle, instruction_for_cell(v, shape, texture), rc,
                                  root / id, id);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const unsigned jobs = std::max(1u, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  DatasetManifest m;
  m.base_seed = base_seed;
  for (std::size_t i = 0; i < total; ++i) {
    if (metas[i]) {
      ++m.episode_count;
      ++m.per_cell_counts[cell_index(metas[i]->shape, metas[i]->texture)];
      m.total_steps += metas[i]->num_steps;
    } else {
      const Shape shape = shape_from_code(static_cast<int>(i % kCells) / 3);
      const Texture texture = texture_from_code(static_cast<int>(i % kCells) % 3);
      m.failures.push_back({episode_id(i / kCells, shape, texture), errors[i]});
    }
  }
  write_text(root / kManifestName, manifest_to_json(m).dump(2) + "\n");
  return m;
}

DatasetManifest load_manifest(const fs::path& root) {
  const fs::path path = root / kManifestName;
  if (!fs::is_regular_file(path)) throw FormatError("missing " + path.string());
  try {
    const auto j = json::parse(read_text(path));
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    m.episode_count = j.at("episode_count").get<std::size_t>();
    const auto cells = j.at("per_cell_counts").get<std::vector<std::size_t>>();
    if (cells.size() != kCells) throw FormatError("per_cell_counts must have 9 entries");
    std::copy(cells.begin(), cells.end(), m.per_cell_counts.begin());
    m.total_steps = j.at("total_steps").get<std::size_t>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto& f : j.value("failures", json::array())) {
      m.failures.push_back({f.at("episode_id").get<std::string>(), f.at("reason").get<std::string>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Episode load_episode(const fs::path& dir) {
  Episode ep;
  ep.meta = read_meta(dir);
  for (auto& s : read_steps(dir)) {
    LoadedStep ls{std::move(s), {}, {}};
    ls.real = png::load(dir / ls.record.real_frame);
    ls.vr = png::load(dir / ls.record.vr_frame);
    ep.steps.push_back(std::move(ls));
  }
  return ep;
}

std::string format_violation(const Violation& v) {
  std::string where = v.episode_id.empty() ? std::string("dataset") : v.episode_id;
  if (v.step) where += fmt::format(" step {}", *v.step);
  return fmt::format("{}: [{}] {}", where, v.kind, v.message);
}

ValidationReport validate_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("dataset root " + root.string() + " is unreadable");
  ValidationReport report;
  auto add = [&](std::string id, std::optional<std::size_t> step, std::string kind,
                 std::string msg) {
    report.violations.push_back({std::move(id), step, std::move(kind), std::move(msg)});
  };

  std::vector<fs::path> dirs;
  for (fs::directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_directory()) dirs.push_back(it->path());
  }
  if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
  std::sort(dirs.begin(), dirs.end());

  std::size_t complete = 0;
  std::size_t total_steps = 0;
  std::array<std::size_t, kCells> cells{};
  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    ++report.episodes;
    if (fs::exists(dir / kIncompleteMarker)) {
      add(id, std::nullopt, "incomplete", "recording did not finish");
      continue;
    }
    EpisodeMeta meta;
    std::vector<StepRecord> steps;
    try {
      meta = read_meta(dir);
      steps = read_steps(dir);
    } catch (const Error& e) {
      add(id, std::nullopt, "format", e.what());
      continue;
    }
    ++complete;
    ++cells[cell_index(meta.shape, meta.texture)];
    total_steps += meta.num_steps;
    report.steps += steps.size();

    if (meta.episode_id != id) add(id, std::nullopt, "meta", "episode_id does not match directory");
    if (meta.num_steps != steps.size()) {
      add(id, std::nullopt, "num_steps",
          fmt::format("meta lists {} steps, episode.jsonl has {}", meta.num_steps, steps.size()));
    }
    if (steps.size() < 2) add(id, std::nullopt, "num_steps", "episode has fewer than 2 steps");
    if (steps.size() > kStepCap) {
      add(id, std::nullopt, "step_cap", fmt::format("{} steps exceed the cap of {}", steps.size(), kStepCap));
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      if (s.step_index != i) {
        add(id, i, "step_order", fmt::format("step_index {} at position {}", s.step_index, i));
      }
      const bool first = i == 0;
      const bool last = i + 1 == steps.size();
      if (s.is_first != first || s.is_last != last || s.is_terminal != last) {
        add(id, i, "flags", "is_first/is_last/is_terminal misplaced");
      }
      if (s.action.size() != kActionArity) {
        add(id, i, "arity", fmt::format("action has {} components, expected 7", s.action.size()));
      } else {
        try {
          (void)parse_action(s.action);
        } catch (const Error& e) {
          add(id, i, "range", e.what());
        }
      }
      if (s.instruction.empty()) add(id, i, "instruction", "empty instruction");
      for (const auto& name : {s.real_frame, s.vr_frame}) {
        const fs::path p = dir / name;
        if (!fs::is_regular_file(p)) {
          add(id, i, "missing_frame", name + " does not exist");
          continue;
        }
        try {
          (void)png::load(p);
        } catch (const Error& e) {
          add(id, i, "bad_frame", e.what());
        }
      }
    }
  }

  try {
    const auto m = load_manifest(root);
    if (m.episode_count != complete) {
      add("", std::nullopt, "manifest",
          fmt::format("episode_count {} but {} complete episodes on disk", m.episode_count, complete));
    }
    if (m.per_cell_counts != cells) add("", std::nullopt, "manifest", "per_cell_counts mismatch");
    if (m.total_steps != total_steps) {
      add("", std::nullopt, "manifest",
          fmt::format("total_steps {} but episodes sum to {}", m.total_steps, total_steps));
    }
  } catch (const Error& e) {
    add("", std::nullopt, "manifest", e.what());
  }
  return report;
}

std::string hash_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 unavailable");
  }
  for (const auto& rel : files) {
    const std::string name = rel.generic_string();
    const std::string content = read_text(root / rel);
    const std::string header = fmt::format("{}\n{}\n", name, content.size());
    EVP_DigestUpdate(ctx.get(), header.data(), header.size());
    EVP_DigestUpdate(ctx.get(), content.data(), content.size());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace hapticdrone::dataset
