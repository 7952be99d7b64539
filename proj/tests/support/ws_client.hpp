#pragma once

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace hd_test {

// Blocking WebSocket console client. Every read has a deadline, so a silent
// server fails the test instead of hanging it.
class WsClient {
 public:
  explicit WsClient(int port, std::chrono::milliseconds timeout = std::chrono::seconds(3))
      : ws_(ioc_), timeout_(timeout) {
    namespace net = boost::asio;
    ws_.next_layer().connect(
        {net::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port)});
    ws_.handshake("127.0.0.1", "/ws");
  }
  ~WsClient() {
    boost::system::error_code ec;
    ws_.next_layer().close(ec);
  }

  nlohmann::json read() {
    auto text = try_read(timeout_);
    if (!text) throw std::runtime_error("no message within the timeout");
    return nlohmann::json::parse(*text);
  }

  void send(const nlohmann::json& j) { send_raw(j.dump()); }
  void send_raw(const std::string& s) { ws_.write(boost::asio::buffer(s)); }

  // Reads until pred holds; throws after max_messages.
  nlohmann::json read_until(const std::function<bool(const nlohmann::json&)>& pred,
                            int max_messages = 500) {
    for (int i = 0; i < max_messages; ++i) {
      auto j = read();
      if (pred(j)) return j;
    }
    throw std::runtime_error("expected message never arrived");
  }

  // True when nothing arrives within the window. A message that does arrive
  // is consumed.
  bool silent_for(std::chrono::milliseconds window) { return !try_read(window).has_value(); }

 private:
  std::optional<std::string> try_read(std::chrono::milliseconds window) {
    if (pending_) {
      // A previous read timed out but is still outstanding; wait on it.
    } else {
      pending_ = true;
      finished_ = false;
      buf_.clear();
      ws_.async_read(buf_, [this](boost::system::error_code ec, std::size_t) {
        finished_ = true;
        pending_ = false;
        ec_ = ec;
      });
    }
    ioc_.restart();
    ioc_.run_for(window);
    if (!finished_) return std::nullopt;
    if (ec_) throw boost::system::system_error(ec_);
    return boost::beast::buffers_to_string(buf_.data());
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
  std::chrono::milliseconds timeout_;
  boost::beast::flat_buffer buf_;
  bool pending_ = false;
  bool finished_ = false;
  boost::system::error_code ec_;
};

}  // namespace hd_test
