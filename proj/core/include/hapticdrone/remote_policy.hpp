#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "hapticdrone/policy.hpp"

namespace hapticdrone::policy {

struct Endpoint {
  std::string host;
  int port = 0;
};

/// Accepts "http://host:port", "host:port" or "remote:http://host:port".
/// Throws ParseError otherwise.
Endpoint parse_endpoint(std::string_view url);

/**
 * Client side of the served-policy boundary.
 *
 * Each act() POSTs the observation to /act. On a timeout or transport error
 * the previous action is returned once; from the second consecutive failure
 * on, the zero (hover) action is returned. A success resets the ladder.
 * Malformed responses and HTTP error statuses raise ProtocolError.
 */
class RemotePolicy final : public Policy {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{250};

  /// Health-checks the server; throws TransportError when it is unreachable
  /// or unhealthy.
  explicit RemotePolicy(std::string url, std::chrono::milliseconds timeout = kDefaultTimeout);
  ~RemotePolicy() override;

  RemotePolicy(const RemotePolicy&) = delete;
  RemotePolicy& operator=(const RemotePolicy&) = delete;

  std::string name() const override { return "remote:" + url_; }
  ActionVector act(const Observation& obs, const sim::WorldState* privileged) override;
  void reset() override;

  const std::string& served_policy_name() const noexcept { return served_name_; }
  int consecutive_failures() const noexcept { return consecutive_failures_; }
  int total_failures() const noexcept { return total_failures_; }

 private:
  struct Client;

  std::string url_;
  std::string served_name_;
  std::unique_ptr<Client> client_;
  ActionVector previous_{};
  int consecutive_failures_ = 0;
  int total_failures_ = 0;
};

}  // namespace hapticdrone::policy
