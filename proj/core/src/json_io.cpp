#include "json_io.hpp"

#include <string>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::json_io {

Vec3 to_vec3(const json& j, const char* what, bool allow_2d, double default_z) {
  if (!j.is_array() || !(j.size() == 3 || (allow_2d && j.size() == 2))) {
    throw ParseError(std::string(what) + " must be an array of " + (allow_2d ? "2 or 3" : "3") +
                     " numbers");
  }
  Vec3 v(0.0, 0.0, default_z);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(std::string(what) + " must contain numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json object_to_json(const VirtualObject& o) {
  return {{"shape", to_string(o.shape)},
          {"texture", to_string(o.texture)},
          {"position", vec(o.position)},
          {"size", o.size}};
}

VirtualObject object_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("object entry must be a JSON object");
  VirtualObject o;
  try {
    o.shape = shape_from_string(j.at("shape").get<std::string>());
    o.texture = texture_from_string(j.at("texture").get<std::string>());
    o.position = to_vec3(j.at("position"), "object position", true);
    o.size = j.value("size", 0.2);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid object: ") + e.what());
  }
  return o;
}

json scene_to_json(const sim::SceneConfig& s) {
  json objects = json::array();
  for (const auto& o : s.objects) objects.push_back(object_to_json(o));
  return {{"drone_start", vec(s.drone_start)},
          {"background", to_string(s.background)},
          {"objects", objects}};
}

sim::SceneConfig scene_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scene must be a JSON object");
  sim::SceneConfig s;
  try {
    if (j.contains("drone_start")) s.drone_start = to_vec3(j.at("drone_start"), "drone_start", true);
    if (j.contains("background")) {
      s.background = sim::background_from_string(j.at("background").get<std::string>());
    }
    if (j.contains("objects")) {
      if (!j.at("objects").is_array()) throw ParseError("scene objects must be an array");
      for (const auto& o : j.at("objects")) s.objects.push_back(object_from_json(o));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid scene: ") + e.what());
  }
  return s;
}

}  // namespace hapticdrone::json_io
