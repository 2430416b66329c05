#pragma once

// Transport-independent telemetry session: owns the simulated mission,
// turns its progress into wire frames, applies operator commands and runs the
// connection-loss watchdog. The HTTP/WebSocket server is a thin shell over
// this class.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aeromap/config.hpp"
#include "aeromap/fuzzy.hpp"
#include "aeromap/mission.hpp"
#include "aeromap/wire.hpp"

namespace aeromap {

struct SessionState {
  RobotState robot_state = RobotState::idle;
  std::int64_t last_client_contact = 0;  // ms
  std::int64_t watchdog_timeout = 2000;  // ms

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

// Halts a moving robot whose operator has been silent for longer than the
// timeout. Idle and halted states are left alone.
SessionState watchdog_tick(SessionState state, std::int64_t now_ms);

// Copy with every millimetre field rounded to the wire resolution.
WallModel wire_quantized(WallModel m);

// The payloads a live session would have published for a finished mission:
// status, then sensor and classification per frame, map batches, the wall
// model (or an insufficient_data error) and a final idle status.
std::vector<Payload> replay_payloads(const MissionLog& log, const AppConfig& cfg);

class Session {
 public:
  // Receives every frame in seq order, already encoded. Called with the
  // session lock held: must not block and must not call back into the
  // session.
  using Sink = std::function<void(const Frame&, const std::string&)>;

  explicit Session(AppConfig cfg);
  // Replay session: `start` streams the recorded mission one payload per
  // step, /api/log serves the recorded log, and motion commands are refused.
  Session(AppConfig cfg, MissionLog recorded);

  std::uint64_t subscribe(Sink sink);
  void unsubscribe(std::uint64_t id);

  // Any client message counts as contact.
  void touch(std::int64_t now_ms);
  // Parses and applies one command document. The reply (ack or error) is
  // broadcast like any other frame and also returned.
  Frame handle_command(std::string_view text, std::int64_t now_ms);
  // Watchdog check; broadcasts a halted status frame when it fires.
  void tick(std::int64_t now_ms);
  // Runs one simulator action if the robot is moving. Returns false when
  // there was nothing to do.
  bool step(std::int64_t now_ms);

  SessionState state() const;
  MissionLog log() const;
  std::uint64_t last_seq() const;
  std::optional<WallModel> wall_model() const;
  // SessionState plus the latest frame of each type, for GET /api/state.
  Json state_json() const;
  std::string log_document() const;

 private:
  Frame publish(std::int64_t t, Payload payload);
  Frame reply_error(std::int64_t now_ms, std::string code, std::string message);
  void publish_status(std::int64_t now_ms, std::string detail);
  void publish_progress(std::int64_t now_ms);
  void finish_mission(std::int64_t now_ms);
  void sync_state();

  mutable std::mutex mu_;
  AppConfig cfg_;
  FuzzyEngine engine_;
  CrispThresholds thresholds_;
  MissionRunner runner_;
  SessionState state_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_sink_ = 1;
  std::map<std::uint64_t, Sink> sinks_;
  std::map<FrameType, Frame> latest_;
  std::size_t sent_frames_ = 0;
  std::size_t sent_points_ = 0;
  std::optional<WallModel> wall_model_;
  std::optional<MissionLog> recorded_;
  std::vector<Payload> replay_;
  std::size_t replay_cursor_ = 0;
  bool replaying_ = false;
};

}  // namespace aeromap
