#include <doctest.h>

#include <json.hpp>

#include <atomic>
#include <thread>

#include "hapticdrone/errors.hpp"
#include "hapticdrone/policy_server.hpp"
#include "hapticdrone/protocol.hpp"
#include "hapticdrone/remote_policy.hpp"
#include "hapticdrone/render.hpp"

// After the Eigen-using headers: httplib pulls in <resolv.h> macros.
#include <httplib.h>

using namespace hapticdrone;
using namespace hapticdrone::protocol;
using namespace std::chrono_literals;

namespace {

Observation sample_observation() {
  sim::SceneConfig s;
  s.objects = {{Shape::Sphere, Texture::Food, {1, -1, 1}, 0.2}};
  const auto w = sim::spawn(s, {});
  return {sim::render_topdown(w, sim::FrameView::Real), sim::render_topdown(w, sim::FrameView::VR),
          "fly to the sphere", 4};
}

std::vector<double> list(const ActionVector& a) {
  const auto l = action_to_list(a);
  return {l.begin(), l.end()};
}

struct Served {
  explicit Served(service::ServedPolicy p, std::string name = "test")
      : server(std::move(name), std::move(p)) {
    server.start({});
  }
  service::PolicyServer server;
};

// Raw server returning a fixed body, to exercise client-side decoding.
struct RawServer {
  explicit RawServer(std::string body, int status = 200) {
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok","policy":"raw"})", "application/json");
    });
    srv.Post("/act", [body, status](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(body, "application/json");
    });
    port = srv.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~RawServer() {
    srv.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
  httplib::Server srv;
  int port = 0;
  std::thread thread;
};

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("base64 vectors") {
    const std::string plain = "foobar";
    for (std::size_t n = 0; n <= plain.size(); ++n) {
      const std::vector<std::uint8_t> bytes(plain.begin(), plain.begin() + static_cast<long>(n));
      const char* expected[] = {"", "Zg==", "Zm8=", "Zm9v", "Zm9vYg==", "Zm9vYmE=", "Zm9vYmFy"};
      CHECK(base64_encode(bytes) == expected[n]);
      CHECK(base64_decode(expected[n]) == bytes);
    }
    CHECK_THROWS_AS(base64_decode("Zm9v!"), ProtocolError);
    CHECK_THROWS_AS(base64_decode("Zm9"), ProtocolError);
  }

  TEST_CASE("request and response roundtrip") {
    const auto obs = sample_observation();
    const auto req = make_request(obs);
    CHECK(decode_request(encode_request(req)) == req);
    const auto back = to_observation(req);
    CHECK(back.real_frame == obs.real_frame);
    CHECK(back.vr_frame == obs.vr_frame);
    CHECK(back.instruction == obs.instruction);
    CHECK(back.step_index == 4);

    const ActResponse resp{{0.1, -0.2, 0, 1, 0, 0, 0.9}, 3.5};
    CHECK(decode_response(encode_response(resp)) == resp);
    const auto h = decode_health(encode_health({"ok", "oracle"}));
    CHECK(h.status == "ok");
    CHECK(h.policy == "oracle");
  }

  TEST_CASE("malformed requests name the field") {
    CHECK_THROWS_AS(decode_request("not json"), ProtocolError);
    auto j = nlohmann::json::parse(encode_request(make_request(sample_observation())));
    j.erase("vr_frame_b64");
    try {
      (void)decode_request(j.dump());
      FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
      CHECK(std::string(e.what()).find("vr_frame_b64") != std::string::npos);
    }
    auto req = make_request(sample_observation());
    req.real_frame_b64 = base64_encode(std::vector<std::uint8_t>{1, 2, 3});
    CHECK_THROWS_AS(to_observation(req), ProtocolError);
    CHECK_THROWS_AS(decode_response(R"({"latency_ms": 1})"), ProtocolError);
  }

  TEST_CASE("zero policy server returns the zero action") {
    Served s(service::serve_adapter(std::make_shared<policy::ZeroPolicy>()), "zero");
    policy::RemotePolicy remote(s.server.url());
    CHECK(remote.served_policy_name() == "zero");
    CHECK(remote.act(sample_observation(), nullptr) == ActionVector{});
    CHECK(remote.consecutive_failures() == 0);

    httplib::Client cli("127.0.0.1", s.server.port());
    const auto res = cli.Post("/act", encode_request(make_request(sample_observation())),
                              "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = decode_response(res->body);
    CHECK(body.action == std::vector<double>(7, 0.0));
    CHECK(body.latency_ms >= 0.0);
    const auto health = cli.Get("/health");
    REQUIRE(health);
    CHECK(decode_health(health->body).policy == "zero");
  }

  TEST_CASE("malformed requests get 400") {
    Served s(service::serve_adapter(std::make_shared<policy::ZeroPolicy>()));
    httplib::Client cli("127.0.0.1", s.server.port());
    for (const char* body : {"", "{", R"({"instruction": 3})", R"({"instruction":"x"})"}) {
      const auto res = cli.Post("/act", body, "application/json");
      REQUIRE(res);
      CHECK(res->status == 400);
      CHECK(nlohmann::json::parse(res->body).contains("error"));
    }
  }

  TEST_CASE("invalid policy output gets 500") {
    for (std::size_t arity : {5u, 6u, 8u}) {
      Served s([arity](const Observation&) { return std::vector<double>(arity, 0.0); });
      httplib::Client cli("127.0.0.1", s.server.port());
      const auto res =
          cli.Post("/act", encode_request(make_request(sample_observation())), "application/json");
      REQUIRE(res);
      CHECK(res->status == 500);
    }
    Served range([](const Observation&) { return std::vector<double>{2, 0, 0, 0, 0, 0, 0}; });
    httplib::Client cli("127.0.0.1", range.server.port());
    const auto res =
        cli.Post("/act", encode_request(make_request(sample_observation())), "application/json");
    REQUIRE(res);
    CHECK(res->status == 500);
    policy::RemotePolicy remote(range.server.url());
    CHECK_THROWS_AS(remote.act(sample_observation(), nullptr), ProtocolError);
  }

  TEST_CASE("served oracle is stateless across requests") {
    Served s(service::serve_adapter(std::make_shared<policy::VisionOraclePolicy>()), "oracle");
    policy::RemotePolicy remote(s.server.url());
    const auto obs = sample_observation();
    const auto first = remote.act(obs, nullptr);
    auto other = obs;
    other.instruction = "fly to the cone";
    (void)remote.act(other, nullptr);
    CHECK(remote.act(obs, nullptr) == first);
    policy::VisionOraclePolicy local;
    CHECK(first == local.act(obs, nullptr));
  }

  TEST_CASE("fallback ladder repeats once then hovers") {
    std::atomic<bool> slow{false};
    const std::vector<double> good{0.5, 0.25, 0, 0, 0, 1, 0.3};
    Served s([&](const Observation&) {
      if (slow) std::this_thread::sleep_for(400ms);
      return good;
    });
    policy::RemotePolicy remote(s.server.url(), 100ms);
    const auto obs = sample_observation();
    const auto expected = parse_action(good);
    CHECK(remote.act(obs, nullptr) == expected);
    slow = true;
    CHECK(remote.act(obs, nullptr) == expected);  // repeat once
    CHECK(remote.consecutive_failures() == 1);
    CHECK(remote.act(obs, nullptr) == ActionVector{});  // then hover
    CHECK(remote.act(obs, nullptr) == ActionVector{});
    CHECK(remote.consecutive_failures() == 3);
    slow = false;
    std::this_thread::sleep_for(500ms);  // let the stalled handlers drain
    CHECK(remote.act(obs, nullptr) == expected);
    CHECK(remote.consecutive_failures() == 0);
    CHECK(remote.total_failures() == 3);
  }

  TEST_CASE("server gone mid-run falls back to hover") {
    auto s = std::make_unique<Served>(service::serve_adapter(std::make_shared<policy::VisionOraclePolicy>()));
    policy::RemotePolicy remote(s->server.url(), 100ms);
    const auto obs = sample_observation();
    const auto first = remote.act(obs, nullptr);
    s.reset();
    CHECK(remote.act(obs, nullptr) == first);
    CHECK(remote.act(obs, nullptr) == ActionVector{});
  }

  TEST_CASE("unreachable server at construction") {
    int port = 0;
    {
      Served s(service::serve_adapter(std::make_shared<policy::ZeroPolicy>()));
      port = s.server.port();
    }
    CHECK_THROWS_AS(policy::RemotePolicy("http://127.0.0.1:" + std::to_string(port), 100ms),
                    TransportError);
  }

  TEST_CASE("malformed responses raise protocol errors") {
    {
      RawServer raw("this is not json");
      policy::RemotePolicy remote(raw.url());
      CHECK_THROWS_AS(remote.act(sample_observation(), nullptr), ProtocolError);
    }
    {
      RawServer raw(R"({"action":[0,0,0,0,0,0],"latency_ms":1})");
      policy::RemotePolicy remote(raw.url());
      CHECK_THROWS_AS(remote.act(sample_observation(), nullptr), ProtocolError);
    }
    {
      RawServer raw(R"({"error":"boom"})", 500);
      policy::RemotePolicy remote(raw.url());
      CHECK_THROWS_AS(remote.act(sample_observation(), nullptr), ProtocolError);
    }
  }

  TEST_CASE("endpoints and bind addresses") {
    const auto e = policy::parse_endpoint("remote:http://localhost:8000");
    CHECK(e.host == "localhost");
    CHECK(e.port == 8000);
    CHECK(policy::parse_endpoint("10.0.0.2:9").port == 9);
    CHECK_THROWS_AS(policy::parse_endpoint("ftp://x:1"), ParseError);
    CHECK_THROWS_AS(policy::parse_endpoint("localhost"), ParseError);
    const auto b = service::parse_bind_address("0.0.0.0:8000");
    CHECK(b.host == "0.0.0.0");
    CHECK(b.port == 8000);
    CHECK_THROWS_AS(service::parse_bind_address("0.0.0.0:99999"), ParseError);
    CHECK_THROWS_AS(service::parse_bind_address("nope"), ParseError);
  }
}
