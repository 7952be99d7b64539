#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hapticdrone/core_model.hpp"
#include "hapticdrone/policy.hpp"

namespace hapticdrone::service {

/// Raw served-policy callable. Its output is validated by the server, so a
/// faulty policy surfaces as HTTP 500 rather than a bad action on the wire.
/// Must be safe to call from several request threads at once.
using ServedPolicy = std::function<std::vector<double>(const Observation&)>;

/// Adapts an observation-only policy. The policy object is shared by all
/// request threads.
ServedPolicy serve_adapter(std::shared_ptr<policy::Policy> p);

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 0;  ///< 0 picks a free port
};

/// Parses "host:port". Throws ParseError.
BindAddress parse_bind_address(std::string_view text);

/**
 * HTTP/1.1 policy server.
 *
 *   POST /act    ActRequest -> 200 ActResponse, 400 on a malformed request,
 *                500 when the policy throws or returns an invalid action
 *   GET  /health -> {"status":"ok","policy":name}
 *
 * Requests are independent; no per-session state is kept.
 */
class PolicyServer {
 public:
  PolicyServer(std::string policy_name, ServedPolicy policy);
  ~PolicyServer();

  PolicyServer(const PolicyServer&) = delete;
  PolicyServer& operator=(const PolicyServer&) = delete;

  /// Binds and starts serving on a background thread. Returns the bound
  /// port. Throws IoError when the address cannot be bound.
  int start(const BindAddress& addr);
  /// Blocks the caller until stop() is called from elsewhere.
  void wait();
  void stop();

  int port() const noexcept { return port_; }
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace hapticdrone::service
