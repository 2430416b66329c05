#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aeromap/config.hpp"
#include "aeromap/error.hpp"

using namespace aeromap;

namespace {

const std::filesystem::path kData = AEROMAP_DATA_DIR;

std::string schema_field(const Json& j) {
  try {
    config_from_json(j);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("shipped data files equal the built-in defaults") {
  CHECK(load_fuzzy_config(kData / "fuzzy_default.json") == FuzzyConfig::defaults());
  const AppConfig shipped = load_config(kData / "default_config.json");
  CHECK(to_json(shipped) == to_json(default_config()));
  CHECK(shipped.fuzzy == FuzzyConfig::defaults());
}

TEST_CASE("to_json and back") {
  const AppConfig d = default_config();
  const AppConfig back = config_from_json(to_json(d));
  CHECK(to_json(back) == to_json(d));
  CHECK(back.plan == d.plan);
  CHECK(back.world.noise == d.world.noise);
  CHECK(back.telemetry == d.telemetry);
  CHECK(fuzzy_config_from_json(to_json(d.fuzzy)) == d.fuzzy);
  CHECK(to_json(wall_params_from_json(to_json(d.walls))) == to_json(d.walls));
}

TEST_CASE("an empty document is the default configuration") {
  CHECK(to_json(config_from_json(Json::object())) == to_json(default_config()));
}

TEST_CASE("partial overrides") {
  const Json j = parse_json(R"({
    "seed": 7,
    "noise": {"distance": 0.1, "enabled": false},
    "plan": {"lane_spacing_mm": 400},
    "world": {"room": [[0, 0], [6000, 0], [6000, 2000], [2500, 2000], [2500, 4000], [0, 4000]],
              "gas_sources": [{"position": {"x": 1000, "y": 3000}, "species": "smoke", "amplitude": 80, "spread": 300}]},
    "fuzzy": {"inputs": {"co2": {"terms": {"medium": {"shape": "triangle", "points": [500, 900, 1300]}}}},
              "centroid_resolution": 2001},
    "telemetry": {"port": 0, "watchdog_timeout_ms": 500}
  })");
  const AppConfig c = config_from_json(j);
  CHECK(c.world.seed == 7);
  CHECK(c.world.noise.distance == 0.1);
  CHECK_FALSE(c.world.noise.enabled);
  CHECK(c.world.noise.co2 == NoiseConfig{}.co2);
  CHECK(c.plan.lane_spacing_mm == 400);
  CHECK(c.world.room.size() == 6);
  REQUIRE(c.world.gas_sources.size() == 1);
  CHECK(c.world.gas_sources[0].species == Species::smoke);
  CHECK(c.fuzzy.input(Channel::co2).term(Term::medium) == MembershipFunction::triangle(500, 900, 1300));
  CHECK(c.fuzzy.input(Channel::co2).term(Term::low) == FuzzyConfig::defaults().input(Channel::co2).term(Term::low));
  CHECK(c.fuzzy.centroid_resolution == 2001);
  CHECK(c.fuzzy.rules.size() == 15);
  CHECK(c.telemetry.port == 0);
  CHECK(c.telemetry.watchdog_timeout_ms == 500);
}

TEST_CASE("rule lists replace the default rule base") {
  const Json j = parse_json(R"({"fuzzy": {"rules": [
    {"if": {"co2": "high", "voc": "high"}, "then": "Poor"},
    {"if": {"co2": "low"}, "then": "Good", "weight": 0.5}]}})");
  const AppConfig c = config_from_json(j);
  REQUIRE(c.fuzzy.rules.size() == 2);
  CHECK(c.fuzzy.rules[0].antecedent.size() == 2);
  CHECK(c.fuzzy.rules[1].weight == 0.5);
}

TEST_CASE("unknown keys and wrong types name the field") {
  CHECK(schema_field(parse_json(R"({"sed": 1})")) == "sed");
  CHECK(schema_field(parse_json(R"({"plan": {"lane": 1}})")) == "plan.lane");
  CHECK(schema_field(parse_json(R"({"noise": {"co2": "high"}})")) == "noise.co2");
  CHECK(schema_field(parse_json(R"({"world": {"gas_sources": [{"position": [1, 2], "species": "co2", "amplitude": 1, "spread": 1, "colour": 3}]}})"))
            .starts_with("world.gas_sources[0]"));
  CHECK(schema_field(parse_json(R"({"fuzzy": {"inputs": {"pm25": {}}}})")) == "fuzzy.inputs.pm25");
  CHECK(schema_field(parse_json(R"({"fuzzy": {"rules": [{"if": {"co2": "low"}}]}})")) == "fuzzy.rules[0].then");
}

TEST_CASE("invalid values are configuration errors") {
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"world": {"room": [[0,0],[10,0],[5,5]]}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"telemetry": {"tick_ms": 250}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"plan": {"lane_spacing_mm": 0}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"noise": {"smoke": 1.5}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"fuzzy": {"rules": [{"if": {"co2": "extreme"}, "then": "Poor"}]}})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(parse_json(R"({"fuzzy": {"output": {"good": {"shape": "triangle", "points": [0, 60, 50]}}}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_json("{"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/aeromap.json"), ConfigError);
}

TEST_CASE("fuzzy file path is relative to the config file") {
  const auto dir = std::filesystem::temp_directory_path() / "aeromap_config_test";
  std::filesystem::create_directories(dir / "sub");
  Json fz = to_json(FuzzyConfig::defaults());
  fz["centroid_resolution"] = 501;
  std::ofstream(dir / "sub" / "rules.json") << fz.dump();
  std::ofstream(dir / "cfg.json") << R"({"fuzzy": "sub/rules.json"})";
  const AppConfig c = load_config(dir / "cfg.json");
  CHECK(c.fuzzy.centroid_resolution == 501);
  std::filesystem::remove_all(dir);
}

}
