#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hapticdrone/world.hpp"

namespace hapticdrone::sim {

/// JSON scene files: {"drone_start": [x,y,z], "background": "default",
/// "objects": [{"shape", "texture", "position", "size"}]}. Object positions
/// may omit z (defaults to 1.0). Throws ParseError.
SceneConfig scene_from_json_string(std::string_view text);
std::string scene_to_json_string(const SceneConfig& scene);
VirtualObject object_from_json_string(std::string_view text);

/// Throws IoError when unreadable, ParseError when malformed.
SceneConfig load_scene_file(const std::filesystem::path& path);

}  // namespace hapticdrone::sim
