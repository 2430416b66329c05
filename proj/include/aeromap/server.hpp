#pragma once

// HTTP + WebSocket front end for a Session, on one port:
//   /ws                 frames out, commands in (one JSON document per message)
//   GET  /api/state     SessionState and the latest frame of each type
//   GET  /api/log       MissionLog as an attachment mission-<timestamp>.json
//   POST /api/command   one command document; replies with the ack or error frame
// Anything else is served from TelemetryConfig::static_dir when set.

#include <cstdint>
#include <memory>

#include "aeromap/config.hpp"
#include "aeromap/session.hpp"

namespace aeromap {

class TelemetryServer {
 public:
  TelemetryServer(Session& session, TelemetryConfig cfg);
  ~TelemetryServer();

  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  // Binds and starts the network and simulation threads. Throws Error when
  // the address cannot be bound.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  // Actual port; differs from the configured one when that was 0.
  std::uint16_t port() const;
  // Milliseconds on the session clock.
  std::int64_t now_ms() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace aeromap
