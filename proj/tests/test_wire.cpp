#include <doctest.h>

#include <sstream>

#include "aeromap/error.hpp"
#include "aeromap/mission.hpp"
#include "aeromap/wire.hpp"
#include "frame_gen.hpp"

using namespace aeromap;

namespace {

std::string schema_field(std::string_view text) {
  try {
    decode_frame(text);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_SUITE("wire") {

TEST_CASE("generated frames round-trip") {
  testing::FrameGen gen(2024);
  for (std::uint64_t i = 1; i <= 10000; ++i) {
    const Frame f = gen.next(i);
    const std::string text = encode_frame(f);
    const Frame back = decode_frame(text);
    REQUIRE(back == f);
    REQUIRE(encode_frame(back) == text);
  }
}

TEST_CASE("status frame is byte-stable") {
  const std::string expected =
      R"({"payload":{"detail":"","pose":{"heading":0.0,"x":0.0,"y":0.0},"robot_state":"idle"},"seq":1,"t":0,"type":"status","v":1})";
  CHECK(encode_frame(Frame{1, 0, StatusPayload{}}) == expected);
  CHECK(encode_frame(decode_frame(expected)) == expected);
  // key order in the input does not matter
  const Frame f = decode_frame(R"({"v":1,"type":"status","t":0,"seq":1,"payload":{"robot_state":"idle"}})");
  CHECK(encode_frame(f) == expected);
}

TEST_CASE("sensor values are written with three decimals") {
  SensorPayload s;
  s.frame.co2 = 763.912345;
  const std::string text = encode_frame(Frame{2, 0, s});
  CHECK(text.find("\"co2\":763.912,") != std::string::npos);
  CHECK(std::get<SensorPayload>(decode_frame(text).payload).frame.co2 == 763.912);
}

TEST_CASE("slopes and scores keep full precision") {
  LineModel l;
  l.b = 0.0123456789012345;
  WallModel w;
  w.lines.push_back(l);
  const Frame back = decode_frame(encode_frame(Frame{1, 0, w}));
  CHECK(std::get<WallModel>(back.payload).lines[0].b == l.b);
}

TEST_CASE("schema errors name the field") {
  CHECK(schema_field(R"({"v":1,"type":"status","t":0,"payload":{"robot_state":"idle"}})") == "seq");
  CHECK(schema_field(R"({"v":1,"seq":1,"type":"status","t":0,"payload":{"robot_state":5}})") == "payload.robot_state");
  CHECK(schema_field(R"({"v":1,"seq":1,"type":"status","t":0})") == "payload");
  CHECK(schema_field(R"({"v":2,"seq":1,"type":"status","t":0,"payload":{"robot_state":"idle"}})") == "v");
  CHECK(schema_field(R"({"v":1,"seq":1,"type":"bogus","t":0,"payload":{}})") == "type");
  CHECK(schema_field(R"({"v":1,"seq":1,"type":"sensor","t":0,"payload":{"pose":{"x":0,"y":0,"heading":0},"frame":{"co2":1}}})")
            .starts_with("payload.frame"));
  CHECK_THROWS_AS(decode_frame("not json"), ConfigError);
}

TEST_CASE("map batches are capped") {
  MapPayload m;
  m.points.resize(kMaxMapBatch);
  CHECK_NOTHROW(decode_frame(encode_frame(Frame{1, 0, m})));
  m.points.resize(kMaxMapBatch + 1);
  CHECK(schema_field(encode_frame(Frame{1, 0, m})) == "payload.points");
}

TEST_CASE("frame type names") {
  for (int i = 0; i < 7; ++i) {
    const auto t = static_cast<FrameType>(i);
    CHECK(frame_type_from_string(to_string(t)) == t);
  }
}

TEST_CASE("mission logs round-trip") {
  World w;
  w.room = RectilinearPolygon::rectangle(4000, 3000);
  w.gas_sources.push_back({{1000, 2000}, Species::co2, 600, 500, {}});
  Rng rng(5);
  const MissionLog log = run_sweep(w, {}, rng);
  const std::string text = encode_mission_log(log);
  CHECK(decode_mission_log(text) == log);
  CHECK(encode_mission_log(decode_mission_log(text)) == text);
  CHECK(parse_json(text).at("v") == 1);
}

TEST_CASE("commands") {
  CHECK(decode_command(R"({"kind":"start"})").kind == CommandKind::start);
  CHECK(decode_command(R"({"kind":"ping","v":1})").kind == CommandKind::ping);
  CHECK_THROWS_AS(decode_command(R"({"kind":"fly"})"), ConfigError);
  CHECK_THROWS_AS(decode_command(R"({})"), SchemaError);
  CHECK_THROWS_AS(decode_command(R"({"kind":"set_plan"})"), SchemaError);
  const Command c = decode_command(R"({"kind":"set_plan","plan":{"lane_spacing_mm":400}})");
  REQUIRE(c.plan);
  CHECK(c.plan->lane_spacing_mm == 400);
  CHECK(c.plan->sample_spacing_mm == SweepPlan{}.sample_spacing_mm);
  CHECK(decode_command(command_to_json(c).dump()) == c);
  try {
    decode_command(R"({"kind":"set_plan","plan":{"bogus":1}})");
    FAIL("accepted an unknown plan key");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "plan.bogus");
  }
  for (int i = 0; i < 6; ++i) {
    const auto k = static_cast<CommandKind>(i);
    CHECK(command_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(command_kind_from_string("fly"));
}

TEST_CASE("x y point files") {
  std::istringstream in("# header\n1 2\n\n  3.5\t-4\n# more\n1e3 0\n");
  const PointCloud c = read_xy(in);
  REQUIRE(c.size() == 3);
  CHECK(c[1].x == 3.5);
  CHECK(c[1].y == -4);
  CHECK(c[2].x == 1000);
  std::ostringstream out;
  write_xy(out, c);
  std::istringstream again(out.str());
  const PointCloud d = read_xy(again);
  REQUIRE(d.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d[i].point() == c[i].point());
  std::istringstream bad("1 2\nthree 4\n");
  CHECK_THROWS_AS(read_xy(bad), ConfigError);
}

TEST_CASE("wall models and reports round-trip as documents") {
  testing::FrameGen gen(7);
  for (int i = 0; i < 100; ++i) {
    const WallModel m = gen.wall_model();
    CHECK(wall_model_from_json(to_json(m)) == m);
  }
  ErrorReport r;
  r.wall_length_mape = {1.5, 2.25};
  r.mean_wall_mape = 1.875;
  r.corner_displacement_mm = {3.001, 4};
  r.estimated_lengths = {4060, 2932.5};
  r.true_lengths = {4000, 3000};
  r.gas_x_mape = 4.17;
  const ErrorReport back = error_report_from_json(to_json(r));
  CHECK(back.wall_length_mape == r.wall_length_mape);
  CHECK(back.gas_x_mape == r.gas_x_mape);
  CHECK_FALSE(back.gas_y_mape);
}

}
