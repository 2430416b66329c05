#pragma once

// JSON wire format, version 1. Field-by-field schema: docs/wire-schema.md.
//
// Millimetre and sensor-channel numbers are written with at most three
// decimals. Everything else (slopes, scores, firing strengths) is written at
// full precision. Objects are emitted with keys in lexicographic order, so
// encoding is canonical and byte-stable.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aeromap/fuzzy.hpp"
#include "aeromap/mission.hpp"
#include "aeromap/robot.hpp"
#include "aeromap/wall_mapper.hpp"

namespace aeromap {

using Json = nlohmann::json;

inline constexpr int kWireVersion = 1;

// Domain types <-> JSON. Decoders throw SchemaError naming the offending
// field, prefixed with its path inside the document.
Json to_json(const Pose& p);
Json to_json(const SensorFrame& f);
Json to_json(const MapPoint& p);
Json to_json(const MissionEvent& e);
Json to_json(const MissionLog& log);
Json to_json(const LineModel& l);
Json to_json(const WallModel& m);
Json to_json(const ErrorReport& r);
Json to_json(const Classification& c);
Json to_json(const SweepPlan& plan);

Pose pose_from_json(const Json& j, const std::string& path = "");
SensorFrame sensor_frame_from_json(const Json& j, const std::string& path = "");
MapPoint map_point_from_json(const Json& j, const std::string& path = "");
MissionEvent mission_event_from_json(const Json& j, const std::string& path = "");
MissionLog mission_log_from_json(const Json& j);
LineModel line_model_from_json(const Json& j, const std::string& path = "");
WallModel wall_model_from_json(const Json& j, const std::string& path = "");
ErrorReport error_report_from_json(const Json& j);
Classification classification_from_json(const Json& j, const std::string& path = "");
// Missing keys keep their defaults; unknown keys are rejected.
SweepPlan sweep_plan_from_json(const Json& j, const std::string& path = "plan");

std::string encode_mission_log(const MissionLog& log);
MissionLog decode_mission_log(std::string_view text);

enum class FrameType { sensor, map, status, wall_model, classification, error, ack };

std::string_view to_string(FrameType t);
FrameType frame_type_from_string(std::string_view name);

struct SensorPayload {
  SensorFrame frame;
  Pose pose;
  friend bool operator==(const SensorPayload&, const SensorPayload&) = default;
};

inline constexpr std::size_t kMaxMapBatch = 64;

struct MapPayload {
  std::vector<MapPoint> points;  // at most kMaxMapBatch
  friend bool operator==(const MapPayload&, const MapPayload&) = default;
};

struct StatusPayload {
  RobotState robot_state = RobotState::idle;
  Pose pose;
  std::string detail;
  friend bool operator==(const StatusPayload&, const StatusPayload&) = default;
};

struct ClassificationPayload {
  std::int64_t frame_timestamp_ms = 0;
  Classification result;
  friend bool operator==(const ClassificationPayload&, const ClassificationPayload&) = default;
};

struct ErrorPayload {
  std::string code;  // e.g. "bad_command"
  std::string message;
  friend bool operator==(const ErrorPayload&, const ErrorPayload&) = default;
};

struct AckPayload {
  std::string command;
  std::string detail;
  friend bool operator==(const AckPayload&, const AckPayload&) = default;
};

using Payload = std::variant<SensorPayload, MapPayload, StatusPayload, WallModel,
                             ClassificationPayload, ErrorPayload, AckPayload>;

struct Frame {
  std::uint64_t seq = 0;
  std::int64_t t = 0;  // ms
  Payload payload;

  FrameType type() const { return static_cast<FrameType>(payload.index()); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

Json frame_to_json(const Frame& f);
Frame frame_from_json(const Json& j);
std::string encode_frame(const Frame& f);
// Throws SchemaError on a missing or mistyped field, ConfigError on text
// that is not JSON.
Frame decode_frame(std::string_view text);

enum class CommandKind { start, stop, home, set_plan, ping, download };

std::string_view to_string(CommandKind k);
std::optional<CommandKind> command_kind_from_string(std::string_view name);

struct Command {
  CommandKind kind = CommandKind::ping;
  std::optional<SweepPlan> plan;  // set_plan only
  friend bool operator==(const Command&, const Command&) = default;
};

Json command_to_json(const Command& c);
// Throws ConfigError for unparseable text or an unknown kind and
// SchemaError for a missing field.
Command decode_command(std::string_view text);

// Two whitespace-separated columns per line, x then y in mm. Blank lines and
// lines starting with '#' are skipped.
PointCloud read_xy(std::istream& in);
void write_xy(std::ostream& out, const PointCloud& cloud);

// Parses JSON text, mapping syntax errors onto ConfigError.
Json parse_json(std::string_view text);

}  // namespace aeromap
