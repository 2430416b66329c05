#include "aeromap/wire.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "aeromap/error.hpp"
#include "aeromap/geometry.hpp"

namespace aeromap {

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "document" : path, "expected an object");
  return j;
}

const Json& field(const Json& j, std::string_view key, const std::string& path) {
  object(j, path);
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(join(path, key));
  return *it;
}

double number(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number()) throw SchemaError(join(path, key), join(path, key) + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_integer()) {
    throw SchemaError(join(path, key), join(path, key) + " must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_unsigned()) {
    throw SchemaError(join(path, key), join(path, key) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string text(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) throw SchemaError(join(path, key), join(path, key) + " must be a string");
  return v.get<std::string>();
}

bool boolean(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_boolean()) throw SchemaError(join(path, key), join(path, key) + " must be a boolean");
  return v.get<bool>();
}

const Json& array(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_array()) throw SchemaError(join(path, key), join(path, key) + " must be an array");
  return v;
}

std::vector<double> numbers(const Json& j, std::string_view key, const std::string& path) {
  const Json& a = array(j, key, path);
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw SchemaError(index_path(join(path, key), i), "expected a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

// Enum decoders throw ConfigError; rethrow naming the field.
template <typename F>
auto named(const Json& j, std::string_view key, const std::string& path, F parse) {
  const std::string s = text(j, key, path);
  try {
    return parse(s);
  } catch (const ConfigError& e) {
    throw SchemaError(join(path, key), e.what());
  }
}

double q(double v) { return quantize_milli(v); }

Json point_json(Point p) { return {{"x", q(p.x)}, {"y", q(p.y)}}; }

Point point_from_json(const Json& j, const std::string& path) {
  return {number(j, "x", path), number(j, "y", path)};
}

std::vector<double> quantized(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = q(v[i]);
  return out;
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

Json to_json(const Pose& p) {
  return {{"heading", q(p.heading)}, {"x", q(p.x)}, {"y", q(p.y)}};
}

Pose pose_from_json(const Json& j, const std::string& path) {
  return {number(j, "x", path), number(j, "y", path), number(j, "heading", path)};
}

Json to_json(const SensorFrame& f) {
  return {{"battery", q(f.battery)},       {"co2", q(f.co2)},
          {"humidity", q(f.humidity)},     {"smoke", q(f.smoke)},
          {"temperature", q(f.temperature)}, {"timestamp_ms", f.timestamp_ms},
          {"voc", q(f.voc)}};
}

SensorFrame sensor_frame_from_json(const Json& j, const std::string& path) {
  SensorFrame f;
  f.timestamp_ms = integer(j, "timestamp_ms", path);
  f.voc = number(j, "voc", path);
  f.co2 = number(j, "co2", path);
  f.smoke = number(j, "smoke", path);
  f.temperature = number(j, "temperature", path);
  f.humidity = number(j, "humidity", path);
  f.battery = number(j, "battery", path);
  return f;
}

Json to_json(const MapPoint& p) {
  return {{"pose_id", p.pose_id}, {"x", q(p.x)}, {"y", q(p.y)}};
}

MapPoint map_point_from_json(const Json& j, const std::string& path) {
  return {number(j, "x", path), number(j, "y", path),
          static_cast<std::size_t>(unsigned_integer(j, "pose_id", path))};
}

Json to_json(const MissionEvent& e) {
  return {{"detail", e.detail}, {"kind", std::string(to_string(e.kind))}, {"t", e.t_ms}};
}

MissionEvent mission_event_from_json(const Json& j, const std::string& path) {
  MissionEvent e;
  e.t_ms = integer(j, "t", path);
  e.kind = named(j, "kind", path, event_kind_from_string);
  e.detail = text(j, "detail", path);
  return e;
}

Json to_json(const MissionLog& log) {
  Json frames = Json::array();
  for (const auto& tf : log.frames) frames.push_back({{"frame", to_json(tf.frame)}, {"pose", to_json(tf.pose)}});
  Json poses = Json::array();
  for (const auto& p : log.scan_poses) poses.push_back(to_json(p));
  Json points = Json::array();
  for (const auto& p : log.points) points.push_back(to_json(p));
  Json events = Json::array();
  for (const auto& e : log.events) events.push_back(to_json(e));
  return {{"events", std::move(events)}, {"frames", std::move(frames)},
          {"points", std::move(points)}, {"scan_poses", std::move(poses)},
          {"v", kWireVersion}};
}

MissionLog mission_log_from_json(const Json& j) {
  object(j, "");
  if (integer(j, "v", "") != kWireVersion) throw SchemaError("v", "unsupported wire version");
  MissionLog log;
  const Json& frames = array(j, "frames", "");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string p = index_path("frames", i);
    log.frames.push_back({sensor_frame_from_json(field(frames[i], "frame", p), join(p, "frame")),
                          pose_from_json(field(frames[i], "pose", p), join(p, "pose"))});
  }
  const Json& poses = array(j, "scan_poses", "");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    log.scan_poses.push_back(pose_from_json(poses[i], index_path("scan_poses", i)));
  }
  const Json& points = array(j, "points", "");
  log.points.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    log.points.push_back(map_point_from_json(points[i], index_path("points", i)));
  }
  const Json& events = array(j, "events", "");
  for (std::size_t i = 0; i < events.size(); ++i) {
    log.events.push_back(mission_event_from_json(events[i], index_path("events", i)));
  }
  return log;
}

std::string encode_mission_log(const MissionLog& log) { return to_json(log).dump(); }

MissionLog decode_mission_log(std::string_view text) {
  return mission_log_from_json(parse_json(text));
}

Json to_json(const LineModel& l) {
  return {{"a", q(l.a)},
          {"b", l.b},
          {"extent", {q(l.extent_min), q(l.extent_max)}},
          {"orientation", std::string(to_string(l.orientation))},
          {"support", l.support}};
}

LineModel line_model_from_json(const Json& j, const std::string& path) {
  LineModel l;
  l.orientation = named(j, "orientation", path, orientation_from_string);
  l.a = number(j, "a", path);
  l.b = number(j, "b", path);
  l.support = static_cast<std::size_t>(unsigned_integer(j, "support", path));
  const auto ext = numbers(j, "extent", path);
  if (ext.size() != 2) throw SchemaError(join(path, "extent"), "extent must hold [min, max]");
  l.extent_min = ext[0];
  l.extent_max = ext[1];
  return l;
}

Json to_json(const WallModel& m) {
  Json lines = Json::array();
  for (const auto& l : m.lines) lines.push_back(to_json(l));
  Json corners = Json::array();
  for (const auto& c : m.corners) corners.push_back(point_json(c));
  return {{"corners", std::move(corners)},
          {"lines", std::move(lines)},
          {"wall_lengths", quantized(m.wall_lengths)}};
}

WallModel wall_model_from_json(const Json& j, const std::string& path) {
  WallModel m;
  const Json& lines = array(j, "lines", path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    m.lines.push_back(line_model_from_json(lines[i], index_path(join(path, "lines"), i)));
  }
  const Json& corners = array(j, "corners", path);
  for (std::size_t i = 0; i < corners.size(); ++i) {
    m.corners.push_back(point_from_json(corners[i], index_path(join(path, "corners"), i)));
  }
  m.wall_lengths = numbers(j, "wall_lengths", path);
  return m;
}

Json to_json(const ErrorReport& r) {
  Json j = {{"corner_displacement_mm", quantized(r.corner_displacement_mm)},
            {"estimated_lengths", quantized(r.estimated_lengths)},
            {"mean_wall_mape", r.mean_wall_mape},
            {"true_lengths", quantized(r.true_lengths)},
            {"wall_length_mape", r.wall_length_mape}};
  if (r.gas_x_mape) j["gas_x_mape"] = *r.gas_x_mape;
  if (r.gas_y_mape) j["gas_y_mape"] = *r.gas_y_mape;
  return j;
}

ErrorReport error_report_from_json(const Json& j) {
  ErrorReport r;
  r.wall_length_mape = numbers(j, "wall_length_mape", "");
  r.mean_wall_mape = number(j, "mean_wall_mape", "");
  r.corner_displacement_mm = numbers(j, "corner_displacement_mm", "");
  r.estimated_lengths = numbers(j, "estimated_lengths", "");
  r.true_lengths = numbers(j, "true_lengths", "");
  if (j.contains("gas_x_mape")) r.gas_x_mape = number(j, "gas_x_mape", "");
  if (j.contains("gas_y_mape")) r.gas_y_mape = number(j, "gas_y_mape", "");
  return r;
}

Json to_json(const Classification& c) {
  return {{"clamped", c.clamped},
          {"class", std::string(to_string(c.air_class))},
          {"class_strengths",
           {{"good", c.class_strengths[0]},
            {"moderate", c.class_strengths[1]},
            {"poor", c.class_strengths[2]}}},
          {"crisp_score", c.crisp_score},
          {"fallback", c.fallback}};
}

Classification classification_from_json(const Json& j, const std::string& path) {
  Classification c;
  c.crisp_score = number(j, "crisp_score", path);
  c.air_class = named(j, "class", path, air_class_from_string);
  const Json& s = field(j, "class_strengths", path);
  const std::string sp = join(path, "class_strengths");
  c.class_strengths = {number(s, "good", sp), number(s, "moderate", sp), number(s, "poor", sp)};
  const Json& clamped = array(j, "clamped", path);
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (!clamped[i].is_string()) {
      throw SchemaError(index_path(join(path, "clamped"), i), "expected a string");
    }
    c.clamped.push_back(clamped[i].get<std::string>());
  }
  c.fallback = boolean(j, "fallback", path);
  return c;
}

Json to_json(const SweepPlan& p) {
  Json j = {{"dock_readings", p.dock_readings},
            {"lane_spacing_mm", p.lane_spacing_mm},
            {"sample_dwell_ms", p.sample_dwell_ms},
            {"sample_spacing_mm", p.sample_spacing_mm},
            {"scan_every", p.scan_every},
            {"scan_increment_deg", p.scan_increment_deg},
            {"scan_max_range_mm", p.scan_max_range_mm},
            {"scan_reading_ms", p.scan_reading_ms},
            {"speed_mm_per_s", p.speed_mm_per_s},
            {"standoff_mm", p.standoff_mm},
            {"turn_ms_per_deg", p.turn_ms_per_deg}};
  if (p.dock) j["dock"] = {{"x", p.dock->x}, {"y", p.dock->y}};
  return j;
}

SweepPlan sweep_plan_from_json(const Json& j, const std::string& path) {
  object(j, path);
  SweepPlan p;
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key == "lane_spacing_mm") {
      p.lane_spacing_mm = number(j, key, path);
    } else if (key == "sample_spacing_mm") {
      p.sample_spacing_mm = number(j, key, path);
    } else if (key == "scan_every") {
      p.scan_every = static_cast<int>(integer(j, key, path));
    } else if (key == "scan_increment_deg") {
      p.scan_increment_deg = number(j, key, path);
    } else if (key == "scan_max_range_mm") {
      p.scan_max_range_mm = number(j, key, path);
    } else if (key == "standoff_mm") {
      p.standoff_mm = number(j, key, path);
    } else if (key == "speed_mm_per_s") {
      p.speed_mm_per_s = number(j, key, path);
    } else if (key == "turn_ms_per_deg") {
      p.turn_ms_per_deg = number(j, key, path);
    } else if (key == "sample_dwell_ms") {
      p.sample_dwell_ms = integer(j, key, path);
    } else if (key == "scan_reading_ms") {
      p.scan_reading_ms = integer(j, key, path);
    } else if (key == "dock_readings") {
      p.dock_readings = static_cast<int>(integer(j, key, path));
    } else if (key == "dock") {
      p.dock = point_from_json(j[key], join(path, key));
    } else {
      throw SchemaError(join(path, key), "unknown field " + join(path, key));
    }
  }
  return p;
}

std::string_view to_string(FrameType t) {
  switch (t) {
    case FrameType::sensor:
      return "sensor";
    case FrameType::map:
      return "map";
    case FrameType::status:
      return "status";
    case FrameType::wall_model:
      return "wall_model";
    case FrameType::classification:
      return "classification";
    case FrameType::error:
      return "error";
    case FrameType::ack:
      return "ack";
  }
  return "?";
}

FrameType frame_type_from_string(std::string_view name) {
  for (FrameType t : {FrameType::sensor, FrameType::map, FrameType::status, FrameType::wall_model,
                      FrameType::classification, FrameType::error, FrameType::ack}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown frame type: " + std::string(name));
}

namespace {

struct PayloadToJson {
  Json operator()(const SensorPayload& p) const {
    return {{"frame", to_json(p.frame)}, {"pose", to_json(p.pose)}};
  }
  Json operator()(const MapPayload& p) const {
    Json pts = Json::array();
    for (const auto& m : p.points) pts.push_back(to_json(m));
    return {{"points", std::move(pts)}};
  }
  Json operator()(const StatusPayload& p) const {
    return {{"detail", p.detail},
            {"pose", to_json(p.pose)},
            {"robot_state", std::string(to_string(p.robot_state))}};
  }
  Json operator()(const WallModel& m) const { return to_json(m); }
  Json operator()(const ClassificationPayload& p) const {
    return {{"frame_timestamp_ms", p.frame_timestamp_ms}, {"result", to_json(p.result)}};
  }
  Json operator()(const ErrorPayload& p) const {
    return {{"code", p.code}, {"message", p.message}};
  }
  Json operator()(const AckPayload& p) const {
    return {{"command", p.command}, {"detail", p.detail}};
  }
};

Payload payload_from_json(FrameType type, const Json& j) {
  const std::string path = "payload";
  object(j, path);
  switch (type) {
    case FrameType::sensor:
      return SensorPayload{sensor_frame_from_json(field(j, "frame", path), "payload.frame"),
                           pose_from_json(field(j, "pose", path), "payload.pose")};
    case FrameType::map: {
      MapPayload p;
      const Json& pts = array(j, "points", path);
      if (pts.size() > kMaxMapBatch) {
        throw SchemaError("payload.points", "map batch exceeds " + std::to_string(kMaxMapBatch));
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        p.points.push_back(map_point_from_json(pts[i], index_path("payload.points", i)));
      }
      return p;
    }
    case FrameType::status: {
      StatusPayload p;
      p.robot_state = named(j, "robot_state", path, robot_state_from_string);
      if (j.contains("pose")) p.pose = pose_from_json(j["pose"], "payload.pose");
      if (j.contains("detail")) p.detail = text(j, "detail", path);
      return p;
    }
    case FrameType::wall_model:
      return wall_model_from_json(j, path);
    case FrameType::classification:
      return ClassificationPayload{integer(j, "frame_timestamp_ms", path),
                                   classification_from_json(field(j, "result", path),
                                                            "payload.result")};
    case FrameType::error:
      return ErrorPayload{text(j, "code", path), text(j, "message", path)};
    case FrameType::ack:
      return AckPayload{text(j, "command", path), text(j, "detail", path)};
  }
  throw InternalError("unhandled frame type");
}

}  // namespace

Json frame_to_json(const Frame& f) {
  return {{"payload", std::visit(PayloadToJson{}, f.payload)},
          {"seq", f.seq},
          {"t", f.t},
          {"type", std::string(to_string(f.type()))},
          {"v", kWireVersion}};
}

Frame frame_from_json(const Json& j) {
  object(j, "");
  if (integer(j, "v", "") != kWireVersion) throw SchemaError("v", "unsupported wire version");
  Frame f;
  f.seq = unsigned_integer(j, "seq", "");
  f.t = integer(j, "t", "");
  const FrameType type = named(j, "type", "", frame_type_from_string);
  f.payload = payload_from_json(type, field(j, "payload", ""));
  return f;
}

std::string encode_frame(const Frame& f) { return frame_to_json(f).dump(); }

Frame decode_frame(std::string_view text) { return frame_from_json(parse_json(text)); }

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::start:
      return "start";
    case CommandKind::stop:
      return "stop";
    case CommandKind::home:
      return "home";
    case CommandKind::set_plan:
      return "set_plan";
    case CommandKind::ping:
      return "ping";
    case CommandKind::download:
      return "download";
  }
  return "?";
}

std::optional<CommandKind> command_kind_from_string(std::string_view name) {
  for (CommandKind k : {CommandKind::start, CommandKind::stop, CommandKind::home,
                        CommandKind::set_plan, CommandKind::ping, CommandKind::download}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Json command_to_json(const Command& c) {
  Json j = {{"kind", std::string(to_string(c.kind))}};
  if (c.plan) j["plan"] = to_json(*c.plan);
  return j;
}

Command decode_command(std::string_view text_in) {
  const Json j = parse_json(text_in);
  const std::string kind = text(j, "kind", "");
  const auto k = command_kind_from_string(kind);
  if (!k) throw ConfigError("unknown command kind: " + kind);
  Command c;
  c.kind = *k;
  if (c.kind == CommandKind::set_plan) c.plan = sweep_plan_from_json(field(j, "plan", ""), "plan");
  return c;
}

PointCloud read_xy(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    std::string rest;
    if (!(ls >> x >> y) || (ls >> rest)) {
      throw ConfigError("xy line " + std::to_string(lineno) + ": expected two numbers");
    }
    cloud.push_back({x, y, 0});
  }
  return cloud;
}

void write_xy(std::ostream& out, const PointCloud& cloud) {
  for (const auto& p : cloud) out << Json(q(p.x)).dump() << ' ' << Json(q(p.y)).dump() << '\n';
}

}  // namespace aeromap
