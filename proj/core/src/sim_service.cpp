#include "hapticdrone/sim_service.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/png_codec.hpp"
#include "hapticdrone/render.hpp"
#include "json_io.hpp"

namespace hapticdrone::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

enum class CommandKind { SetInstruction, Pause, Resume, Reset, Spawn };

class WsSession;

struct Command {
  CommandKind kind = CommandKind::Pause;
  std::string text;
  sim::SceneConfig scene;
  VirtualObject object;
  std::weak_ptr<WsSession> from;
};

std::string error_message(const std::string& what) {
  return json{{"type", "error"}, {"message", what}}.dump();
}

// Validates a console command without touching the session.
Command parse_command(const std::string& text, const sim::WorldBounds& bounds) {
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("command is not valid JSON");
  if (!j.is_object() || !j.contains("cmd") || !j.at("cmd").is_string()) {
    throw ParseError("command must be an object with a string \"cmd\"");
  }
  const auto cmd = j.at("cmd").get<std::string>();
  Command c;
  if (cmd == "set_instruction") {
    if (!j.contains("text") || !j.at("text").is_string()) {
      throw ParseError("set_instruction needs a string \"text\"");
    }
    c.kind = CommandKind::SetInstruction;
    c.text = j.at("text").get<std::string>();
    (void)policy::parse_instruction(c.text);
  } else if (cmd == "pause") {
    c.kind = CommandKind::Pause;
  } else if (cmd == "resume") {
    c.kind = CommandKind::Resume;
  } else if (cmd == "reset") {
    if (!j.contains("scene")) throw ParseError("reset needs a \"scene\"");
    c.kind = CommandKind::Reset;
    c.scene = json_io::scene_from_json(j.at("scene"));
    auto problems = sim::scene_violations(c.scene, bounds);
    if (!problems.empty()) throw ValidationError(std::move(problems));
  } else if (cmd == "spawn") {
    if (!j.contains("object")) throw ParseError("spawn needs an \"object\"");
    c.kind = CommandKind::Spawn;
    c.object = json_io::object_from_json(j.at("object"));
  } else {
    throw ParseError("unknown command '" + cmd + "'");
  }
  return c;
}

const char* command_name(CommandKind k) {
  switch (k) {
    case CommandKind::SetInstruction: return "set_instruction";
    case CommandKind::Pause: return "pause";
    case CommandKind::Resume: return "resume";
    case CommandKind::Reset: return "reset";
    case CommandKind::Spawn: return "spawn";
  }
  return "";
}

}  // namespace

struct SimService::Impl {
  Impl(const sim::SceneConfig& scene, std::string instruction,
       std::shared_ptr<policy::Policy> p, LoopOptions loop_opts, SimServiceOptions o)
      : policy(std::move(p)), opts(o),
        loop(std::make_unique<ClosedLoop>(scene, std::move(instruction), *policy, loop_opts)) {}

  std::shared_ptr<policy::Policy> policy;
  SimServiceOptions opts;
  std::unique_ptr<ClosedLoop> loop;  // sim thread only, once started

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread net_thread;
  std::thread sim_thread;
  int port = 0;

  // Network thread only.
  std::vector<std::weak_ptr<WsSession>> sessions;
  std::shared_ptr<const std::string> latest_snapshot;
  std::uint64_t latest_tick = 0;

  // Shared with the sim thread.
  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<Command> commands;
  bool stopping = false;
  bool done = false;
  std::uint64_t tick_count = 0;
  std::shared_ptr<const FrameRaster> frame_real;
  std::shared_ptr<const FrameRaster> frame_vr;
  LoopResult result;
  std::string error;

  void accept();
  void broadcast(std::shared_ptr<const std::string> msg, std::uint64_t tick,
                 std::shared_ptr<const std::string> snapshot);
  void broadcast_control(std::shared_ptr<const std::string> msg);
  void on_command(const std::string& text, const std::shared_ptr<WsSession>& from);
  void register_session(const std::shared_ptr<WsSession>& s);
  http::response<http::vector_body<std::uint8_t>> handle_http(
      const http::request<http::string_body>& req);

  void sim_main();
  void publish(std::uint64_t tick, bool paused);
  void refresh_frames();
  void post_control(std::string msg, const std::weak_ptr<WsSession>& to);
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, SimService::Impl* owner)
      : ws_(std::move(socket)), owner_(owner) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->ws_.text(true);
      self->owner_->register_session(self);
      self->read();
    });
  }

  /// Events carry a tick; anything not newer than the last one sent is dropped.
  void send_event(std::shared_ptr<const std::string> msg, std::uint64_t tick) {
    if (sent_any_ && tick <= last_tick_) return;
    sent_any_ = true;
    last_tick_ = tick;
    enqueue(std::move(msg));
  }

  void send_control(std::shared_ptr<const std::string> msg) { enqueue(std::move(msg)); }

  void close() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->owner_->on_command(text, self);
      self->read();
    });
  }

  void enqueue(std::shared_ptr<const std::string> msg) {
    constexpr std::size_t kMaxQueued = 1024;
    if (queue_.size() >= kMaxQueued) {
      close();
      return;
    }
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->queue_.clear();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  SimService::Impl* owner_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  std::uint64_t last_tick_ = 0;
  bool sent_any_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, SimService::Impl* owner)
      : stream_(std::move(socket)), owner_(owner) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->on_read();
                     });
  }

  void on_read() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/ws") {
        reply_plain(http::status::not_found, "no WebSocket endpoint at this path\n");
        return;
      }
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), owner_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::vector_body<std::uint8_t>>>(
        owner_->handle_http(req_));
    send(res);
  }

  void reply_plain(http::status status, const std::string& body) {
    auto res = std::make_shared<http::response<http::vector_body<std::uint8_t>>>(
        status, req_.version());
    res->set(http::field::content_type, "text/plain");
    res->body().assign(body.begin(), body.end());
    res->keep_alive(false);
    res->prepare_payload();
    send(res);
  }

  void send(std::shared_ptr<http::response<http::vector_body<std::uint8_t>>> res) {
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (!res->keep_alive()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  SimService::Impl* owner_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

void SimService::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), this)->run();
    accept();
  });
}

void SimService::Impl::register_session(const std::shared_ptr<WsSession>& s) {
  sessions.push_back(s);
  if (latest_snapshot) s->send_event(latest_snapshot, latest_tick);
}

void SimService::Impl::broadcast(std::shared_ptr<const std::string> msg, std::uint64_t tick,
                                 std::shared_ptr<const std::string> snapshot) {
  latest_snapshot = std::move(snapshot);
  latest_tick = tick;
  std::vector<std::weak_ptr<WsSession>> alive;
  for (auto& w : sessions) {
    if (auto s = w.lock()) {
      s->send_event(msg, tick);
      alive.push_back(w);
    }
  }
  sessions.swap(alive);
}

void SimService::Impl::broadcast_control(std::shared_ptr<const std::string> msg) {
  for (auto& w : sessions) {
    if (auto s = w.lock()) s->send_control(msg);
  }
}

void SimService::Impl::on_command(const std::string& text,
                                  const std::shared_ptr<WsSession>& from) {
  try {
    Command c = parse_command(text, loop->options().sim.bounds);
    c.from = from;
    {
      std::lock_guard lk(mu);
      commands.push_back(std::move(c));
    }
    cv.notify_all();
  } catch (const Error& e) {
    from->send_control(std::make_shared<const std::string>(error_message(e.what())));
  }
}

http::response<http::vector_body<std::uint8_t>> SimService::Impl::handle_http(
    const http::request<http::string_body>& req) {
  http::response<http::vector_body<std::uint8_t>> res{http::status::ok, req.version()};
  res.keep_alive(req.keep_alive());
  auto text = [&](http::status status, const std::string& type, const std::string& body) {
    res.result(status);
    res.set(http::field::content_type, type);
    res.body().assign(body.begin(), body.end());
  };
  const auto target = std::string(req.target());
  if (req.method() != http::verb::get) {
    text(http::status::method_not_allowed, "application/json", error_message("only GET is served"));
  } else if (target == "/frame/real" || target == "/frame/vr") {
    std::shared_ptr<const FrameRaster> frame;
    {
      std::lock_guard lk(mu);
      frame = target == "/frame/real" ? frame_real : frame_vr;
    }
    if (!frame) {
      text(http::status::service_unavailable, "application/json", error_message("no frame yet"));
    } else {
      res.set(http::field::content_type, "image/png");
      res.body() = png::encode(*frame);
    }
  } else if (target == "/health") {
    std::uint64_t ticks;
    {
      std::lock_guard lk(mu);
      ticks = tick_count;
    }
    text(http::status::ok, "application/json",
         json{{"status", "ok"}, {"policy", policy->name()}, {"tick", ticks}}.dump());
  } else {
    text(http::status::not_found, "application/json", error_message("not found: " + target));
  }
  res.prepare_payload();
  return res;
}

void SimService::Impl::post_control(std::string msg, const std::weak_ptr<WsSession>& to) {
  auto m = std::make_shared<const std::string>(std::move(msg));
  net::post(ioc, [m, to] {
    if (auto s = to.lock()) s->send_control(m);
  });
}

void SimService::Impl::refresh_frames() {
  auto real = std::make_shared<const FrameRaster>(
      sim::render_topdown(loop->world(), sim::FrameView::Real));
  auto vr =
      std::make_shared<const FrameRaster>(sim::render_topdown(loop->world(), sim::FrameView::VR));
  std::lock_guard lk(mu);
  frame_real = std::move(real);
  frame_vr = std::move(vr);
}

void SimService::Impl::publish(std::uint64_t tick, bool paused) {
  auto e = loop->event();
  e.tick = tick;
  e.paused = paused;
  auto msg = std::make_shared<const std::string>(encode_event(e));
  auto snap = std::make_shared<const std::string>(encode_event(e, true));
  net::post(ioc, [this, msg, snap, tick] { broadcast(msg, tick, snap); });
}

void SimService::Impl::sim_main() {
  using clock = std::chrono::steady_clock;
  bool paused = opts.start_paused;
  std::uint64_t tick = 0;
  auto deadline = clock::now();

  for (;;) {
    std::deque<Command> batch;
    {
      std::lock_guard lk(mu);
      if (stopping) break;
      batch.swap(commands);
    }
    for (auto& c : batch) {
      try {
        switch (c.kind) {
          case CommandKind::SetInstruction: loop->set_instruction(c.text); break;
          case CommandKind::Pause: paused = true; break;
          case CommandKind::Resume: paused = false; break;
          case CommandKind::Reset: loop->reset(c.scene); break;
          case CommandKind::Spawn: loop->spawn(c.object); break;
        }
        if (c.kind != CommandKind::Pause && c.kind != CommandKind::Resume) {
          std::lock_guard lk(mu);
          result = {};
        }
        auto ack = std::make_shared<const std::string>(json{{"type", "ack"},
                                                            {"cmd", command_name(c.kind)},
                                                            {"tick", tick},
                                                            {"paused", paused}}
                                                           .dump());
        net::post(ioc, [this, ack] { broadcast_control(ack); });
      } catch (const Error& e) {
        post_control(error_message(e.what()), c.from);
      }
    }
    if (!batch.empty()) refresh_frames();

    if (paused || loop->finished()) {
      if (!paused && opts.exit_when_finished) break;
      std::unique_lock lk(mu);
      cv.wait(lk, [&] { return stopping || !commands.empty(); });
      deadline = clock::now();
      continue;
    }

    const auto begin = clock::now();
    TickRecord rec;
    try {
      rec = loop->tick();
    } catch (const std::exception& e) {
      paused = true;
      {
        std::lock_guard lk(mu);
        error = e.what();
      }
      auto msg = std::make_shared<const std::string>(error_message(std::string("policy failed: ") + e.what()));
      net::post(ioc, [this, msg] { broadcast_control(msg); });
      continue;
    }
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - begin).count();
    ++tick;
    refresh_frames();
    {
      std::lock_guard lk(mu);
      tick_count = tick;
      result.trajectory = loop->trajectory();
      result.outcome = loop->outcome();
      result.target = loop->target_position();
      result.actions.push_back(rec.action);
      result.tick_compute_ms.push_back(ms);
    }
    publish(tick, paused);

    deadline += opts.tick_period;
    std::unique_lock lk(mu);
    cv.wait_until(lk, deadline, [&] { return stopping; });
  }
  {
    std::lock_guard lk(mu);
    done = true;
  }
  cv.notify_all();
}

SimService::SimService(const sim::SceneConfig& scene, std::string instruction,
                       std::shared_ptr<policy::Policy> policy, LoopOptions loop,
                       SimServiceOptions opts)
    : impl_(std::make_shared<Impl>(scene, std::move(instruction), std::move(policy),
                                   std::move(loop), opts)) {
  if (opts.tick_period.count() < 0) throw InputError("tick period must be >= 0");
}

SimService::~SimService() { stop(); }

int SimService::start(const BindAddress& addr) {
  auto& im = *impl_;
  if (im.net_thread.joinable()) throw Error("sim service already started");
  beast::error_code ec;
  const auto address = net::ip::make_address(addr.host == "localhost" ? "127.0.0.1" : addr.host, ec);
  if (ec) throw IoError("invalid bind host '" + addr.host + "'");
  const tcp::endpoint ep{address, static_cast<unsigned short>(addr.port)};
  im.acceptor.open(ep.protocol(), ec);
  if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(ep, ec);
  if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw IoError("cannot bind " + addr.host + ":" + std::to_string(addr.port) + ": " +
                  ec.message());
  }
  im.port = im.acceptor.local_endpoint().port();
  // Tick 0 is in place before anyone can connect.
  im.refresh_frames();
  {
    auto e = im.loop->event();
    e.paused = im.opts.start_paused;
    im.latest_snapshot = std::make_shared<const std::string>(encode_event(e, true));
    im.latest_tick = 0;
  }
  im.accept();
  im.net_thread = std::thread([&im] { im.ioc.run(); });
  im.sim_thread = std::thread([&im] { im.sim_main(); });
  return im.port;
}

void SimService::wait() {
  std::unique_lock lk(impl_->mu);
  impl_->cv.wait(lk, [&] { return impl_->done || impl_->stopping; });
}

void SimService::stop() {
  auto& im = *impl_;
  {
    std::lock_guard lk(im.mu);
    im.stopping = true;
  }
  im.cv.notify_all();
  if (im.sim_thread.joinable()) im.sim_thread.join();
  if (im.net_thread.joinable()) {
    net::post(im.ioc, [&im] {
      beast::error_code ec;
      im.acceptor.close(ec);
      for (auto& w : im.sessions) {
        if (auto s = w.lock()) s->close();
      }
      im.ioc.stop();
    });
    im.net_thread.join();
  }
}

int SimService::port() const noexcept { return impl_->port; }

std::uint64_t SimService::ticks() const {
  std::lock_guard lk(impl_->mu);
  return impl_->tick_count;
}

LoopResult SimService::result() const {
  std::lock_guard lk(impl_->mu);
  return impl_->result;
}

std::string SimService::last_error() const {
  std::lock_guard lk(impl_->mu);
  return impl_->error;
}

}  // namespace hapticdrone::service
