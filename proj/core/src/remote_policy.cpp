#include "hapticdrone/remote_policy.hpp"

#include <httplib.h>

#include <regex>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/protocol.hpp"

namespace hapticdrone::policy {

struct RemotePolicy::Client {
  httplib::Client http;
  Client(const std::string& host, int port) : http(host, port) {}
};

Endpoint parse_endpoint(std::string_view url) {
  static const std::regex kPattern(R"(^(?:remote:)?(?:http://)?([A-Za-z0-9_.\-]+):([0-9]{1,5})/?$)");
  const std::string s(url);
  std::smatch m;
  if (!std::regex_match(s, m, kPattern)) {
    throw ParseError("invalid endpoint '" + s + "' (expected http://host:port)");
  }
  const int port = std::stoi(m[2].str());
  if (port <= 0 || port > 65535) throw ParseError("endpoint port out of range in '" + s + "'");
  return {m[1].str(), port};
}

RemotePolicy::RemotePolicy(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)) {
  const Endpoint ep = parse_endpoint(url_);
  client_ = std::make_unique<Client>(ep.host, ep.port);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();
  client_->http.set_connection_timeout(0, static_cast<time_t>(usec));
  client_->http.set_read_timeout(0, static_cast<time_t>(usec));
  client_->http.set_write_timeout(0, static_cast<time_t>(usec));
  client_->http.set_keep_alive(true);

  // The health probe gets a longer budget than the per-tick deadline.
  httplib::Client probe(ep.host, ep.port);
  probe.set_connection_timeout(2, 0);
  probe.set_read_timeout(2, 0);
  const auto res = probe.Get("/health");
  if (!res) {
    throw TransportError("policy server at " + url_ + " is unreachable: " +
                         httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("policy server health check returned " + std::to_string(res->status));
  }
  try {
    const auto health = protocol::decode_health(res->body);
    if (health.status != "ok") throw TransportError("policy server reports status " + health.status);
    served_name_ = health.policy;
  } catch (const ProtocolError& e) {
    throw TransportError(std::string("bad health response: ") + e.what());
  }
}

RemotePolicy::~RemotePolicy() = default;

void RemotePolicy::reset() {
  previous_ = {};
  consecutive_failures_ = 0;
}

ActionVector RemotePolicy::act(const Observation& obs, const sim::WorldState*) {
  const std::string body = protocol::encode_request(protocol::make_request(obs));
  const auto res = client_->http.Post("/act", body, "application/json");
  if (!res) {
    ++consecutive_failures_;
    ++total_failures_;
    return consecutive_failures_ == 1 ? previous_ : ActionVector{};
  }
  if (res->status != 200) {
    throw ProtocolError("policy server returned HTTP " + std::to_string(res->status) + ": " +
                        res->body);
  }
  const auto response = protocol::decode_response(res->body);
  ActionVector action;
  try {
    action = parse_action(response.action);
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("malformed action from policy server: ") + e.what());
  }
  consecutive_failures_ = 0;
  previous_ = action;
  return action;
}

}  // namespace hapticdrone::policy
