#include "hapticdrone/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "hapticdrone/errors.hpp"
#include "json_io.hpp"

namespace hapticdrone::sim {

namespace {

json_io::json parse_text(std::string_view text) {
  auto j = json_io::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON");
  return j;
}

}  // namespace

SceneConfig scene_from_json_string(std::string_view text) {
  return json_io::scene_from_json(parse_text(text));
}

std::string scene_to_json_string(const SceneConfig& scene) {
  return json_io::scene_to_json(scene).dump(2);
}

VirtualObject object_from_json_string(std::string_view text) {
  return json_io::object_from_json(parse_text(text));
}

SceneConfig load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return scene_from_json_string(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace hapticdrone::sim
