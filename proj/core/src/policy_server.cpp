#include "hapticdrone/policy_server.hpp"

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <regex>
#include <thread>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/protocol.hpp"

namespace hapticdrone::service {

ServedPolicy serve_adapter(std::shared_ptr<policy::Policy> p) {
  return [p = std::move(p)](const Observation& obs) {
    const auto list = action_to_list(p->act(obs, nullptr));
    return std::vector<double>(list.begin(), list.end());
  };
}

BindAddress parse_bind_address(std::string_view text) {
  static const std::regex kPattern(R"(^([A-Za-z0-9_.\-]+):([0-9]{1,5})$)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_match(s, m, kPattern)) {
    throw ParseError("invalid bind address '" + s + "' (expected host:port)");
  }
  const int port = std::stoi(m[2].str());
  if (port > 65535) throw ParseError("port out of range in '" + s + "'");
  return {m[1].str(), port};
}

struct PolicyServer::Impl {
  std::string name;
  ServedPolicy policy;
  httplib::Server server;
  std::thread thread;
  std::string host;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

PolicyServer::PolicyServer(std::string policy_name, ServedPolicy policy)
    : impl_(std::make_unique<Impl>()) {
  impl_->name = std::move(policy_name);
  impl_->policy = std::move(policy);

  auto& srv = impl_->server;
  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(protocol::encode_health({"ok", impl_->name}), "application/json");
  });
  srv.Post("/act", [this](const httplib::Request& req, httplib::Response& res) {
    Observation obs;
    try {
      obs = protocol::to_observation(protocol::decode_request(req.body));
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(protocol::encode_error(e.what()), "application/json");
      return;
    }

    const auto begin = std::chrono::steady_clock::now();
    std::vector<double> action;
    try {
      action = impl_->policy(obs);
      (void)parse_action(action);
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(protocol::encode_error(std::string("policy failure: ") + e.what()),
                      "application/json");
      return;
    }
    const std::chrono::duration<double, std::milli> latency =
        std::chrono::steady_clock::now() - begin;
    res.set_content(protocol::encode_response({std::move(action), latency.count()}),
                    "application/json");
  });
}

PolicyServer::~PolicyServer() { stop(); }

int PolicyServer::start(const BindAddress& addr) {
  auto& srv = impl_->server;
  const int port = addr.port == 0 ? srv.bind_to_any_port(addr.host)
                                  : (srv.bind_to_port(addr.host, addr.port) ? addr.port : -1);
  if (port < 0) {
    throw IoError("cannot bind policy server to " + addr.host + ":" + std::to_string(addr.port));
  }
  port_ = port;
  impl_->host = addr.host;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void PolicyServer::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void PolicyServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

std::string PolicyServer::url() const {
  return "http://" + (impl_->host == "0.0.0.0" ? std::string("127.0.0.1") : impl_->host) + ":" +
         std::to_string(port_);
}

}  // namespace hapticdrone::service
