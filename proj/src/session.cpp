#include "aeromap/session.hpp"

#include "aeromap/error.hpp"
#include "aeromap/geometry.hpp"

namespace aeromap {

namespace {

bool moving(RobotState s) { return s == RobotState::sweeping || s == RobotState::homing; }

}  // namespace

SessionState watchdog_tick(SessionState state, std::int64_t now_ms) {
  if (moving(state.robot_state) && now_ms - state.last_client_contact > state.watchdog_timeout) {
    state.robot_state = RobotState::halted;
  }
  return state;
}

WallModel wire_quantized(WallModel m) {
  for (auto& l : m.lines) {
    l.a = quantize_milli(l.a);
    l.extent_min = quantize_milli(l.extent_min);
    l.extent_max = quantize_milli(l.extent_max);
  }
  for (auto& c : m.corners) c = {quantize_milli(c.x), quantize_milli(c.y)};
  for (auto& w : m.wall_lengths) w = quantize_milli(w);
  return m;
}

std::vector<Payload> replay_payloads(const MissionLog& log, const AppConfig& cfg) {
  const FuzzyEngine engine(cfg.fuzzy);
  const CrispThresholds thresholds = crossover_thresholds(cfg.fuzzy);
  const Pose dock{dock_position(cfg.world.room, cfg.plan).x,
                  dock_position(cfg.world.room, cfg.plan).y, 0.0};
  std::vector<Payload> out;
  out.emplace_back(StatusPayload{RobotState::sweeping, dock, "replay"});
  for (const TaggedFrame& tf : log.frames) {
    out.emplace_back(SensorPayload{tf.frame, tf.pose});
    out.emplace_back(ClassificationPayload{tf.frame.timestamp_ms,
                                           engine.classify_or_fallback(tf.frame, thresholds)});
  }
  for (std::size_t i = 0; i < log.points.size(); i += kMaxMapBatch) {
    const std::size_t n = std::min(kMaxMapBatch, log.points.size() - i);
    MapPayload batch;
    batch.points.assign(log.points.begin() + static_cast<std::ptrdiff_t>(i),
                        log.points.begin() + static_cast<std::ptrdiff_t>(i + n));
    out.emplace_back(std::move(batch));
  }
  try {
    out.emplace_back(wire_quantized(extract_walls(log.points, cfg.walls)));
  } catch (const Error& e) {
    out.emplace_back(ErrorPayload{"insufficient_data", e.what()});
  }
  const Pose last = log.frames.empty() ? dock : log.frames.back().pose;
  out.emplace_back(StatusPayload{RobotState::idle, last, "replay_complete"});
  return out;
}

Session::Session(AppConfig cfg, MissionLog recorded) : Session(std::move(cfg)) {
  replay_ = replay_payloads(recorded, cfg_);
  recorded_ = std::move(recorded);
}

Session::Session(AppConfig cfg)
    : cfg_(std::move(cfg)),
      engine_(cfg_.fuzzy),
      thresholds_(crossover_thresholds(cfg_.fuzzy)),
      runner_(cfg_.world, cfg_.plan, Rng(cfg_.world.seed)) {
  state_.watchdog_timeout = cfg_.telemetry.watchdog_timeout_ms;
}

std::uint64_t Session::subscribe(Sink sink) {
  std::lock_guard lock(mu_);
  const std::uint64_t id = next_sink_++;
  sinks_.emplace(id, std::move(sink));
  return id;
}

void Session::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(mu_);
  sinks_.erase(id);
}

void Session::touch(std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  state_.last_client_contact = std::max(state_.last_client_contact, now_ms);
}

Frame Session::publish(std::int64_t t, Payload payload) {
  Frame f{++seq_, t, std::move(payload)};
  const std::string encoded = encode_frame(f);
  latest_[f.type()] = f;
  for (auto& [id, sink] : sinks_) {
    (void)id;
    sink(f, encoded);
  }
  return f;
}

Frame Session::reply_error(std::int64_t now_ms, std::string code, std::string message) {
  return publish(now_ms, ErrorPayload{std::move(code), std::move(message)});
}

void Session::sync_state() { state_.robot_state = runner_.state(); }

void Session::publish_status(std::int64_t now_ms, std::string detail) {
  sync_state();
  publish(now_ms, StatusPayload{state_.robot_state, runner_.pose(), std::move(detail)});
}

void Session::publish_progress(std::int64_t now_ms) {
  const MissionLog& log = runner_.log();
  for (; sent_frames_ < log.frames.size(); ++sent_frames_) {
    const TaggedFrame& tf = log.frames[sent_frames_];
    publish(now_ms, SensorPayload{tf.frame, tf.pose});
    publish(now_ms, ClassificationPayload{tf.frame.timestamp_ms,
                                          engine_.classify_or_fallback(tf.frame, thresholds_)});
  }
  while (sent_points_ < log.points.size()) {
    const std::size_t n = std::min(kMaxMapBatch, log.points.size() - sent_points_);
    MapPayload batch;
    batch.points.assign(log.points.begin() + static_cast<std::ptrdiff_t>(sent_points_),
                        log.points.begin() + static_cast<std::ptrdiff_t>(sent_points_ + n));
    sent_points_ += n;
    publish(now_ms, std::move(batch));
  }
}

void Session::finish_mission(std::int64_t now_ms) {
  try {
    wall_model_ = extract_walls(runner_.log().points, cfg_.walls);
    publish(now_ms, wire_quantized(*wall_model_));
  } catch (const Error& e) {
    reply_error(now_ms, "insufficient_data", e.what());
  }
}

Frame Session::handle_command(std::string_view text, std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  state_.last_client_contact = std::max(state_.last_client_contact, now_ms);
  Command cmd;
  try {
    cmd = decode_command(text);
  } catch (const ConfigError& e) {
    return reply_error(now_ms, "bad_command", e.what());
  }
  const std::string kind(to_string(cmd.kind));
  if (recorded_) {
    if (cmd.kind == CommandKind::start) {
      replay_cursor_ = 0;
      replaying_ = true;
    } else if (cmd.kind != CommandKind::ping && cmd.kind != CommandKind::download) {
      return reply_error(now_ms, "invalid_state", kind + " is not available while replaying");
    }
    return publish(now_ms, AckPayload{kind, cmd.kind == CommandKind::download ? "/api/log"
                                            : cmd.kind == CommandKind::ping   ? "pong"
                                                                              : "replaying"});
  }
  const RobotState s = runner_.state();
  switch (cmd.kind) {
    case CommandKind::start:
      if (s == RobotState::halted) {
        runner_.resume();
        publish_status(now_ms, "resumed");
      } else if (s == RobotState::idle) {
        runner_.start();
        sent_frames_ = 0;
        sent_points_ = 0;
        wall_model_.reset();
        publish_status(now_ms, "started");
      } else {
        return reply_error(now_ms, "invalid_state",
                           "start while " + std::string(to_string(s)));
      }
      break;
    case CommandKind::stop:
      if (moving(s)) {
        runner_.halt("operator");
        publish_status(now_ms, "operator");
      }
      break;
    case CommandKind::home:
      if (s != RobotState::homing) {
        runner_.begin_homing("operator");
        publish_status(now_ms, "homing");
      }
      break;
    case CommandKind::set_plan:
      if (s != RobotState::idle) {
        return reply_error(now_ms, "invalid_state",
                           "set_plan while " + std::string(to_string(s)));
      }
      try {
        MissionRunner next(cfg_.world, *cmd.plan, Rng(cfg_.world.seed));
        runner_ = std::move(next);
        cfg_.plan = *cmd.plan;
      } catch (const ConfigError& e) {
        return reply_error(now_ms, "bad_command", e.what());
      }
      break;
    case CommandKind::ping:
    case CommandKind::download:
      break;
  }
  sync_state();
  const std::string detail = cmd.kind == CommandKind::download ? "/api/log"
                             : cmd.kind == CommandKind::ping   ? "pong"
                                                               : std::string(to_string(state_.robot_state));
  return publish(now_ms, AckPayload{kind, detail});
}

void Session::tick(std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  sync_state();
  const SessionState next = watchdog_tick(state_, now_ms);
  if (next.robot_state == RobotState::halted && state_.robot_state != RobotState::halted) {
    runner_.halt("watchdog");
    publish_status(now_ms, "watchdog");
  }
}

bool Session::step(std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  if (recorded_) {
    if (!replaying_ || replay_cursor_ >= replay_.size()) {
      replaying_ = false;
      return false;
    }
    publish(now_ms, replay_[replay_cursor_++]);
    return true;
  }
  const RobotState before = runner_.state();
  if (!moving(before)) return false;
  const bool was_finished = runner_.finished();
  runner_.advance();
  publish_progress(now_ms);
  if (runner_.state() != before) publish_status(now_ms, std::string(to_string(runner_.state())));
  if (runner_.finished() && !was_finished && !runner_.log().points.empty()) {
    finish_mission(now_ms);
  }
  sync_state();
  return true;
}

SessionState Session::state() const {
  std::lock_guard lock(mu_);
  SessionState s = state_;
  s.robot_state = runner_.state();
  return s;
}

MissionLog Session::log() const {
  std::lock_guard lock(mu_);
  return recorded_ ? *recorded_ : runner_.log();
}

std::uint64_t Session::last_seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

std::optional<WallModel> Session::wall_model() const {
  std::lock_guard lock(mu_);
  return wall_model_;
}

Json Session::state_json() const {
  std::lock_guard lock(mu_);
  Json latest = Json::object();
  for (const auto& [type, frame] : latest_) latest[std::string(to_string(type))] = frame_to_json(frame);
  const MissionLog& log = runner_.log();
  return {{"latest", std::move(latest)},
          {"mission",
           {{"clock_ms", runner_.clock_ms()},
            {"finished", runner_.finished()},
            {"frames", log.frames.size()},
            {"points", log.points.size()}}},
          {"seq", seq_},
          {"session",
           {{"last_client_contact", state_.last_client_contact},
            {"robot_state", std::string(to_string(runner_.state()))},
            {"watchdog_timeout", state_.watchdog_timeout}}},
          {"v", kWireVersion}};
}

std::string Session::log_document() const {
  std::lock_guard lock(mu_);
  return encode_mission_log(recorded_ ? *recorded_ : runner_.log());
}

}  // namespace aeromap
