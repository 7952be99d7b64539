#pragma once

// Policy-server wire schema. JSON bodies over HTTP/1.1:
//   POST /act    {"instruction", "real_frame_b64", "vr_frame_b64", "step_index"}
//             -> {"action": [vx, vy, vz, hx, hy, hz, hv], "latency_ms"}
//   GET /health -> {"status": "ok", "policy": <name>}
// Frames are base64 (RFC 4648, padded) of 640x320 RGB8 PNGs.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hapticdrone/core_model.hpp"

namespace hapticdrone::protocol {

struct ActRequest {
  std::string instruction;
  std::string real_frame_b64;
  std::string vr_frame_b64;
  std::uint64_t step_index = 0;

  friend bool operator==(const ActRequest&, const ActRequest&) = default;
};

struct ActResponse {
  std::vector<double> action;
  double latency_ms = 0.0;

  friend bool operator==(const ActResponse&, const ActResponse&) = default;
};

struct HealthResponse {
  std::string status;
  std::string policy;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string encode_request(const ActRequest& r);
/// Throws ProtocolError naming the offending field.
ActRequest decode_request(std::string_view body);

std::string encode_response(const ActResponse& r);
/// Structural decode only; the action list is validated by parse_action.
ActResponse decode_response(std::string_view body);

std::string encode_health(const HealthResponse& h);
HealthResponse decode_health(std::string_view body);

std::string encode_error(std::string_view message);

/// PNG-encodes and base64-wraps both frames.
ActRequest make_request(const Observation& obs);
/// Decodes both frames; throws ProtocolError if either is not a 640x320 RGB PNG.
Observation to_observation(const ActRequest& r);

}  // namespace hapticdrone::protocol
