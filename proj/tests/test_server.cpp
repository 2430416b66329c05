#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aeromap/config.hpp"
#include "aeromap/error.hpp"
#include "aeromap/server.hpp"
#include "aeromap/session.hpp"
#include "net_client.hpp"

using namespace aeromap;
using aeromap::testing::http_request;
using aeromap::testing::WsClient;
using namespace std::chrono_literals;

namespace {

AppConfig fast_config() {
  AppConfig cfg = default_config();
  cfg.world.noise.enabled = false;
  cfg.telemetry.port = 0;
  cfg.telemetry.action_period_ms = 0;
  cfg.telemetry.watchdog_timeout_ms = 60000;
  return cfg;
}

bool has_status(const std::vector<Frame>& frames, RobotState s) {
  for (const Frame& f : frames)
    if (const auto* p = std::get_if<StatusPayload>(&f.payload); p && p->robot_state == s) return true;
  return false;
}

bool has_type(const std::vector<Frame>& frames, FrameType t) {
  for (const Frame& f : frames)
    if (f.type() == t) return true;
  return false;
}

}  // namespace

TEST_SUITE("server") {

TEST_CASE("websocket start streams a sweeping status") {
  const AppConfig cfg = fast_config();
  Session session(cfg);
  TelemetryServer server(session, cfg.telemetry);
  server.start();
  CHECK(server.port() != 0);
  WsClient ws(server.port());
  ws.send(R"({"kind":"start"})");
  REQUIRE(ws.wait_for([](const auto& f) { return has_status(f, RobotState::sweeping); }, 5s));
  const auto frames = ws.frames();
  CHECK(frames.front().type() == FrameType::status);
  CHECK(std::get<StatusPayload>(frames.front().payload).robot_state == RobotState::sweeping);
  CHECK(ws.wait_for([](const auto& f) { return has_type(f, FrameType::ack); }, 5s));
  server.stop();
}

TEST_CASE("two websocket clients receive the same frames") {
  const AppConfig cfg = fast_config();
  Session session(cfg);
  TelemetryServer server(session, cfg.telemetry);
  server.start();
  WsClient a(server.port());
  WsClient b(server.port());
  // b is subscribed once it has seen the ack to its own ping.
  b.send(R"({"kind":"ping"})");
  REQUIRE(b.wait_for([](const auto& f) { return !f.empty(); }, 5s));
  a.send(R"({"kind":"start"})");
  auto done = [](const auto& f) { return has_type(f, FrameType::wall_model); };
  REQUIRE(a.wait_for(done, 60s));
  REQUIRE(b.wait_for(done, 60s));
  server.stop();

  const auto ta = a.texts();
  const auto fa = a.frames();
  const auto tb = b.texts();
  const auto fb = b.frames();
  // From b's first frame on, both streams are identical.
  std::size_t offset = 0;
  while (offset < fa.size() && fa[offset].seq != fb.front().seq) ++offset;
  REQUIRE(offset < fa.size());
  REQUIRE(ta.size() - offset == tb.size());
  bool same = true;
  for (std::size_t i = 0; i < tb.size(); ++i) same = same && ta[offset + i] == tb[i];
  CHECK(same);
  CHECK(tb.size() > 100);
  for (std::size_t i = 1; i < fa.size(); ++i) CHECK(fa[i].seq == fa[i - 1].seq + 1);
}

TEST_CASE("REST endpoints") {
  const AppConfig cfg = fast_config();
  Session session(cfg);
  TelemetryServer server(session, cfg.telemetry);
  server.start();
  const auto port = server.port();

  auto state = http_request(port, "GET", "/api/state");
  CHECK(state.status == 200);
  CHECK(state.headers["Content-Type"] == "application/json");
  CHECK(parse_json(state.body)["session"]["robot_state"] == "idle");

  auto bad = http_request(port, "POST", "/api/command", R"({"kind":"fly"})");
  CHECK(bad.status == 400);
  CHECK(decode_frame(bad.body).type() == FrameType::error);
  auto invalid = http_request(port, "POST", "/api/command", R"({"kind":"set_plan","plan":{"lane_spacing_mm":0}})");
  CHECK(invalid.status == 400);

  auto ok = http_request(port, "POST", "/api/command", R"({"kind":"start"})");
  CHECK(ok.status == 200);
  const Frame ack = decode_frame(ok.body);
  CHECK(std::get<AckPayload>(ack.payload).command == "start");

  CHECK(http_request(port, "POST", "/api/command", R"({"kind":"start"})").status == 400);
  CHECK(http_request(port, "GET", "/api/command").status == 405);
  CHECK(http_request(port, "POST", "/api/state", "{}").status == 405);

  const auto deadline = std::chrono::steady_clock::now() + 60s;
  while (session.state().robot_state != RobotState::idle && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(20ms);
  REQUIRE(session.state().robot_state == RobotState::idle);

  auto log = http_request(port, "GET", "/api/log");
  CHECK(log.status == 200);
  const std::string disposition = log.headers["Content-Disposition"];
  CHECK(disposition.starts_with("attachment; filename=\"mission-"));
  CHECK(disposition.ends_with("Z.json\""));
  CHECK(disposition.size() == std::string(R"(attachment; filename="mission-20260101T000000Z.json")").size());
  CHECK(decode_mission_log(log.body) == session.log());
  CHECK(extract_walls(decode_mission_log(log.body).points, cfg.walls) == *session.wall_model());

  state = http_request(port, "GET", "/api/state");
  const Json sj = parse_json(state.body);
  CHECK(sj["mission"]["finished"] == true);
  CHECK(frame_from_json(sj["latest"]["wall_model"]).type() == FrameType::wall_model);

  auto missing = http_request(port, "GET", "/nope");
  CHECK(missing.status == 404);
  CHECK(parse_json(missing.body)["code"] == "not_found");
  server.stop();
}

TEST_CASE("static files") {
  const auto dir = std::filesystem::temp_directory_path() / "aeromap_static_test";
  std::filesystem::create_directories(dir / "js");
  std::ofstream(dir / "index.html") << "<html>aeromap</html>";
  std::ofstream(dir / "js" / "app.js") << "console.log(1);";
  std::ofstream(dir.parent_path() / "aeromap_secret.txt") << "secret";

  AppConfig cfg = fast_config();
  cfg.telemetry.static_dir = dir.string();
  Session session(cfg);
  TelemetryServer server(session, cfg.telemetry);
  server.start();
  auto index = http_request(server.port(), "GET", "/");
  CHECK(index.status == 200);
  CHECK(index.body == "<html>aeromap</html>");
  CHECK(index.headers["Content-Type"] == "text/html");
  auto js = http_request(server.port(), "GET", "/js/app.js");
  CHECK(js.status == 200);
  CHECK(js.headers["Content-Type"] == "text/javascript");
  CHECK(http_request(server.port(), "GET", "/../aeromap_secret.txt").status == 404);
  CHECK(http_request(server.port(), "GET", "/missing.css").status == 404);
  server.stop();
  std::filesystem::remove_all(dir);
  std::filesystem::remove(dir.parent_path() / "aeromap_secret.txt");
}

TEST_CASE("watchdog halts the robot after the client goes quiet") {
  AppConfig cfg = fast_config();
  cfg.telemetry.action_period_ms = 20;
  cfg.telemetry.watchdog_timeout_ms = 300;
  Session session(cfg);
  TelemetryServer server(session, cfg.telemetry);
  server.start();
  WsClient ws(server.port());
  ws.send(R"({"kind":"start"})");
  const auto sent = std::chrono::steady_clock::now();
  REQUIRE(ws.wait_for([](const auto& f) { return has_status(f, RobotState::halted); }, 5s));
  const auto frames = ws.frames();
  std::size_t i = 0;
  while (!(frames[i].type() == FrameType::status &&
           std::get<StatusPayload>(frames[i].payload).robot_state == RobotState::halted))
    ++i;
  CHECK(std::get<StatusPayload>(frames[i].payload).detail == "watchdog");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(ws.received_at(i) - sent);
  CHECK(elapsed.count() >= 300);
  CHECK(elapsed.count() <= 400);
  CHECK(session.state().robot_state == RobotState::halted);
  server.stop();
}

TEST_CASE("binding an address in use is an error") {
  AppConfig cfg = fast_config();
  Session s1(cfg), s2(cfg);
  TelemetryServer first(s1, cfg.telemetry);
  first.start();
  TelemetryConfig taken = cfg.telemetry;
  taken.port = first.port();
  TelemetryServer second(s2, taken);
  CHECK_THROWS_AS(second.start(), Error);
  taken.bind = "not-an-address";
  TelemetryServer third(s2, taken);
  CHECK_THROWS_AS(third.start(), Error);
}

TEST_CASE("replay server") {
  AppConfig cfg = fast_config();
  Session live(cfg);
  std::int64_t now = 0;
  live.handle_command(R"({"kind":"start"})", now);
  while (live.step(now)) live.touch(now += 10);

  Session replay(cfg, live.log());
  TelemetryServer server(replay, cfg.telemetry);
  server.start();
  WsClient ws(server.port());
  ws.send(R"({"kind":"start"})");
  REQUIRE(ws.wait_for([](const auto& f) {
    for (const Frame& fr : f)
      if (const auto* s = std::get_if<StatusPayload>(&fr.payload); s && s->detail == "replay_complete") return true;
    return false;
  }, 60s));
  std::optional<WallModel> model;
  for (const Frame& f : ws.frames())
    if (const auto* m = std::get_if<WallModel>(&f.payload)) model = *m;
  REQUIRE(model);
  CHECK(*model == wire_quantized(*live.wall_model()));
  CHECK(http_request(server.port(), "POST", "/api/command", R"({"kind":"home"})").status == 400);
  CHECK(decode_mission_log(http_request(server.port(), "GET", "/api/log").body) == live.log());
  server.stop();
}

}
