#pragma once

// nlohmann/json conversions for domain types. Internal to the library.

#include <json.hpp>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/world.hpp"

namespace hapticdrone::json_io {

using nlohmann::json;

inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

/// Accepts [x, y, z] or, when allow_2d, [x, y] with z = default_z.
Vec3 to_vec3(const json& j, const char* what, bool allow_2d = false, double default_z = 1.0);

json object_to_json(const VirtualObject& o);
VirtualObject object_from_json(const json& j);

json scene_to_json(const sim::SceneConfig& s);
sim::SceneConfig scene_from_json(const json& j);

}  // namespace hapticdrone::json_io
