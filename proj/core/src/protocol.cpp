#include "hapticdrone/protocol.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/png_codec.hpp"

namespace hapticdrone::protocol {

using nlohmann::json;

namespace {

json parse_object(std::string_view body, const char* what) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ProtocolError(std::string(what) + " is not valid JSON");
  if (!j.is_object()) throw ProtocolError(std::string(what) + " must be a JSON object");
  return j;
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw ProtocolError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

FrameRaster decode_frame(const std::string& b64, const char* name) {
  try {
    return png::decode(base64_decode(b64));
  } catch (const FormatError& e) {
    throw ProtocolError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ProtocolError("invalid base64 payload");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string encode_request(const ActRequest& r) {
  return json{{"instruction", r.instruction},
              {"real_frame_b64", r.real_frame_b64},
              {"vr_frame_b64", r.vr_frame_b64},
              {"step_index", r.step_index}}
      .dump();
}

ActRequest decode_request(std::string_view body) {
  const json j = parse_object(body, "request body");
  ActRequest r;
  r.instruction = string_field(j, "instruction");
  if (r.instruction.empty()) throw ProtocolError("field 'instruction' must be non-empty");
  r.real_frame_b64 = string_field(j, "real_frame_b64");
  r.vr_frame_b64 = string_field(j, "vr_frame_b64");
  const json& step = field(j, "step_index");
  if (!step.is_number_integer() || (step.is_number_integer() && !step.is_number_unsigned() &&
                                    step.get<std::int64_t>() < 0)) {
    throw ProtocolError("field 'step_index' must be a non-negative integer");
  }
  r.step_index = step.get<std::uint64_t>();
  return r;
}

std::string encode_response(const ActResponse& r) {
  return json{{"action", r.action}, {"latency_ms", r.latency_ms}}.dump();
}

ActResponse decode_response(std::string_view body) {
  const json j = parse_object(body, "response body");
  ActResponse r;
  const json& action = field(j, "action");
  if (!action.is_array()) throw ProtocolError("field 'action' must be an array");
  for (const auto& x : action) {
    if (!x.is_number()) throw ProtocolError("field 'action' must contain only numbers");
    r.action.push_back(x.get<double>());
  }
  const json& latency = field(j, "latency_ms");
  if (!latency.is_number()) throw ProtocolError("field 'latency_ms' must be a number");
  r.latency_ms = latency.get<double>();
  return r;
}

std::string encode_health(const HealthResponse& h) {
  return json{{"status", h.status}, {"policy", h.policy}}.dump();
}

HealthResponse decode_health(std::string_view body) {
  const json j = parse_object(body, "health body");
  return {string_field(j, "status"), string_field(j, "policy")};
}

std::string encode_error(std::string_view message) {
  return json{{"error", std::string(message)}}.dump();
}

ActRequest make_request(const Observation& obs) {
  return {obs.instruction, base64_encode(png::encode(obs.real_frame)),
          base64_encode(png::encode(obs.vr_frame)), obs.step_index};
}

Observation to_observation(const ActRequest& r) {
  Observation obs;
  obs.real_frame = decode_frame(r.real_frame_b64, "real_frame_b64");
  obs.vr_frame = decode_frame(r.vr_frame_b64, "vr_frame_b64");
  obs.instruction = r.instruction;
  obs.step_index = r.step_index;
  return obs;
}

}  // namespace hapticdrone::protocol
