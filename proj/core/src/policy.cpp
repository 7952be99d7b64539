#include "hapticdrone/policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <regex>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/render.hpp"

namespace hapticdrone::policy {

namespace {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

template <typename Pred>
std::optional<std::size_t> nearest_match(const sim::WorldState& w, Pred pred) {
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    if (!pred(w.objects[i])) continue;
    const double d = (w.objects[i].position - w.drone.position).norm();
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::size_t resolve_simple(const std::variant<ByShape, ByTexture>& sel, const sim::WorldState& w) {
  std::optional<std::size_t> found;
  if (const auto* s = std::get_if<ByShape>(&sel)) {
    found = nearest_match(w, [&](const VirtualObject& o) { return o.shape == s->shape; });
  } else {
    const auto& t = std::get<ByTexture>(sel);
    found = nearest_match(w, [&](const VirtualObject& o) { return o.texture == t.texture; });
  }
  if (!found) {
    throw ResolutionError("no object in the scene matches selector " +
                          std::visit([](const auto& v) { return describe(TargetSelector{v}); }, sel));
  }
  return *found;
}

}  // namespace

std::string describe(const TargetSelector& sel) {
  struct {
    std::string operator()(const ByShape& s) const {
      return "ByShape(" + std::string(to_string(s.shape)) + ")";
    }
    std::string operator()(const ByTexture& t) const {
      return "ByTexture(" + std::string(to_string(t.texture)) + ")";
    }
    std::string operator()(const Relative& r) const {
      return r.side == Side::Left ? "Relative(left)" : "Relative(right)";
    }
    std::string operator()(const Follow& f) const {
      return "Follow(" +
             std::visit([](const auto& v) { return describe(TargetSelector{v}); }, f.inner) + ")";
    }
  } visitor;
  return std::visit(visitor, sel);
}

const std::vector<std::string>& supported_templates() {
  static const std::vector<std::string> kTemplates = {
      "fly to the {cube|sphere|cone}",
      "touch the {food|plastic|other} object",
      "fly to the {left|right} object",
      "follow the {cube|sphere|cone}",
      "follow the {food|plastic|other} object",
  };
  return kTemplates;
}

TargetSelector parse_instruction(std::string_view text) {
  static const std::regex kFlyShape("^fly to the (cube|sphere|cone)$");
  static const std::regex kTouchTexture("^touch the (food|plastic|other) object$");
  static const std::regex kRelative("^fly to the (left|right) object$");
  static const std::regex kFollowShape("^follow the (cube|sphere|cone)$");
  static const std::regex kFollowTexture("^follow the (food|plastic|other)( object)?$");

  const std::string s = normalize(text);
  std::smatch m;
  if (std::regex_match(s, m, kFlyShape)) return ByShape{shape_from_string(m[1].str())};
  if (std::regex_match(s, m, kTouchTexture)) return ByTexture{texture_from_string(m[1].str())};
  if (std::regex_match(s, m, kRelative)) {
    return Relative{m[1].str() == "left" ? Side::Left : Side::Right};
  }
  if (std::regex_match(s, m, kFollowShape)) return Follow{ByShape{shape_from_string(m[1].str())}};
  if (std::regex_match(s, m, kFollowTexture)) {
    return Follow{ByTexture{texture_from_string(m[1].str())}};
  }

  std::string msg = "unrecognized instruction '" + std::string(text) + "'; supported templates:";
  for (const auto& t : supported_templates()) msg += "\n  " + t;
  throw ParseError(msg);
}

std::string instruction_for(const TargetSelector& sel) {
  struct {
    std::string operator()(const ByShape& s) const {
      return "fly to the " + std::string(to_string(s.shape));
    }
    std::string operator()(const ByTexture& t) const {
      return "touch the " + std::string(to_string(t.texture)) + " object";
    }
    std::string operator()(const Relative& r) const {
      return r.side == Side::Left ? "fly to the left object" : "fly to the right object";
    }
    std::string operator()(const Follow& f) const {
      if (const auto* s = std::get_if<ByShape>(&f.inner)) {
        return "follow the " + std::string(to_string(s->shape));
      }
      return "follow the " + std::string(to_string(std::get<ByTexture>(f.inner).texture)) +
             " object";
    }
  } visitor;
  return std::visit(visitor, sel);
}

std::size_t resolve_target(const TargetSelector& sel, const sim::WorldState& w) {
  if (w.objects.empty()) throw ResolutionError("scene is empty; cannot resolve " + describe(sel));

  if (const auto* r = std::get_if<Relative>(&sel)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < w.objects.size(); ++i) {
      const Vec3& p = w.objects[i].position;
      const Vec3& q = w.objects[best].position;
      const bool better_x = r->side == Side::Left ? p.x() < q.x() : p.x() > q.x();
      if (better_x || (p.x() == q.x() && p.y() < q.y())) best = i;
    }
    return best;
  }
  if (const auto* f = std::get_if<Follow>(&sel)) return resolve_simple(f->inner, w);
  if (const auto* s = std::get_if<ByShape>(&sel)) return resolve_simple(*s, w);
  return resolve_simple(std::get<ByTexture>(sel), w);
}

void OracleConfig::validate(double v_max) const {
  std::vector<std::string> problems;
  if (!(kp > 0.0)) problems.emplace_back("kp must be > 0");
  if (!(v_clamp > 0.0) || v_clamp > v_max) {
    problems.emplace_back("v_clamp must lie in (0, v_max]");
  }
  if (!(arrival_radius > 0.0)) problems.emplace_back("arrival_radius must be > 0");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

double texture_intensity(Texture t) noexcept {
  switch (t) {
    case Texture::Food: return 0.3;
    case Texture::Plastic: return 0.9;
    case Texture::Other: return 0.6;
  }
  return 0.0;
}

ActionVector oracle_act(const sim::WorldState& w, const TargetSelector& sel,
                        const OracleConfig& cfg, double /*t*/) {
  const std::size_t target = resolve_target(sel, w);
  const VirtualObject& obj = w.objects[target];

  Vec3 v = cfg.kp * (obj.position - w.drone.position);
  const double speed = v.norm();
  if (speed > cfg.v_clamp) v *= cfg.v_clamp / speed;
  v = v.cwiseMax(-1.0).cwiseMin(1.0);

  ActionVector a{v.x(), v.y(), v.z(), 0.0, 0.0, 0.0, 0.0};
  const auto contact = sim::contact_query(w);
  if (contact && contact->in_contact && contact->object_index == target) {
    const Vec3 toward = obj.position - w.drone.position;
    const double dist = toward.norm();
    const Vec3 dir = dist < 1e-9 ? Vec3(0.0, 0.0, -1.0) : Vec3(toward / dist);
    a.hx = std::clamp(dir.x(), -1.0, 1.0);
    a.hy = std::clamp(dir.y(), -1.0, 1.0);
    a.hz = std::clamp(dir.z(), -1.0, 1.0);
    a.hv = texture_intensity(obj.texture);
  }
  return a;
}

ActionVector OraclePolicy::act(const Observation& obs, const sim::WorldState* privileged) {
  if (privileged == nullptr) throw InputError("oracle policy requires privileged world state");
  return oracle_act(*privileged, parse_instruction(obs.instruction), cfg_, privileged->sim_time);
}

namespace {

std::optional<Texture> texture_of_color(Rgb c) {
  for (Texture t : kAllTextures) {
    if (sim::texture_color(t) == c) return t;
  }
  return std::nullopt;
}

struct Blob {
  Texture texture;
  std::size_t count = 0;
  int min_col = FrameRaster::kWidth;
  int max_col = -1;
  int min_row = FrameRaster::kHeight;
  int max_row = -1;
};

PerceivedObject interpret(const Blob& b) {
  const int width = b.max_col - b.min_col + 1;
  const int height = b.max_row - b.min_row + 1;
  const double fill = static_cast<double>(b.count) / (static_cast<double>(width) * height);

  PerceivedObject o;
  o.texture = b.texture;
  o.pixel_count = b.count;
  double center_col = 0.5 * (b.min_col + b.max_col);
  double center_row = 0.5 * (b.min_row + b.max_row);
  double radius_px = 0.5 * (width - 1);
  if (fill >= 0.92) {
    o.shape = Shape::Cube;
  } else if (fill >= 0.64) {
    o.shape = Shape::Sphere;
  } else {
    o.shape = Shape::Cone;
    // The triangle's base spans r * sqrt(3); its apex sits r above the center.
    radius_px = (width - 1) / std::sqrt(3.0);
    center_row = b.min_row + radius_px;
  }
  o.position = {(center_col - sim::kCenterCol) / sim::kPixelsPerMeter,
                (sim::kCenterRow - center_row) / sim::kPixelsPerMeter};
  o.size = std::max(radius_px, 0.5) / sim::kPixelsPerMeter;
  return o;
}

}  // namespace

Perception perceive(const FrameRaster& real, const FrameRaster& vr) {
  Perception out;

  double sum_col = 0.0;
  double sum_row = 0.0;
  std::size_t n = 0;
  for (int row = 0; row < FrameRaster::kHeight; ++row) {
    for (int col = 0; col < FrameRaster::kWidth; ++col) {
      if (real.at(col, row) == sim::kDroneColor) {
        sum_col += col;
        sum_row += row;
        ++n;
      }
    }
  }
  if (n > 0) {
    const double col = sum_col / static_cast<double>(n);
    const double row = sum_row / static_cast<double>(n);
    out.drone_xy = Vec2((col - sim::kCenterCol) / sim::kPixelsPerMeter,
                        (sim::kCenterRow - row) / sim::kPixelsPerMeter);
  }

  std::vector<std::uint8_t> visited(std::size_t{FrameRaster::kWidth} * FrameRaster::kHeight, 0);
  std::vector<std::pair<int, int>> stack;
  for (int row = 0; row < FrameRaster::kHeight; ++row) {
    for (int col = 0; col < FrameRaster::kWidth; ++col) {
      const std::size_t idx = static_cast<std::size_t>(row) * FrameRaster::kWidth + col;
      if (visited[idx]) continue;
      const auto texture = texture_of_color(vr.at(col, row));
      if (!texture) continue;

      Blob blob{*texture};
      const Rgb color = vr.at(col, row);
      visited[idx] = 1;
      stack.assign(1, {col, row});
      while (!stack.empty()) {
        const auto [c, r] = stack.back();
        stack.pop_back();
        ++blob.count;
        blob.min_col = std::min(blob.min_col, c);
        blob.max_col = std::max(blob.max_col, c);
        blob.min_row = std::min(blob.min_row, r);
        blob.max_row = std::max(blob.max_row, r);
        constexpr std::array<std::pair<int, int>, 4> kSteps = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
        for (const auto& [dc, dr] : kSteps) {
          const int nc = c + dc;
          const int nr = r + dr;
          if (!FrameRaster::contains(nc, nr)) continue;
          const std::size_t nidx = static_cast<std::size_t>(nr) * FrameRaster::kWidth + nc;
          if (visited[nidx] || !(vr.at(nc, nr) == color)) continue;
          visited[nidx] = 1;
          stack.emplace_back(nc, nr);
        }
      }
      out.objects.push_back(interpret(blob));
    }
  }
  return out;
}

ActionVector VisionOraclePolicy::act(const Observation& obs, const sim::WorldState*) {
  const TargetSelector sel = parse_instruction(obs.instruction);
  const Perception seen = perceive(obs.real_frame, obs.vr_frame);
  if (!seen.drone_xy || seen.objects.empty()) return {};

  // Top-down frames carry no altitude; assume the drone flies at object height.
  constexpr double kAssumedAltitude = 1.0;
  sim::WorldState w;
  w.drone.position = {seen.drone_xy->x(), seen.drone_xy->y(), kAssumedAltitude};
  for (const auto& p : seen.objects) {
    w.objects.push_back({p.shape, p.texture, {p.position.x(), p.position.y(), kAssumedAltitude},
                         p.size});
  }
  try {
    return oracle_act(w, sel, cfg_, static_cast<double>(obs.step_index));
  } catch (const ResolutionError&) {
    return {};  // target not visible: hover
  }
}

}  // namespace hapticdrone::policy
