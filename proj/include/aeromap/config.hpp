#pragma once

// Configuration file: one JSON document, schema in docs/config-schema.md.
// Every section and key is optional and falls back to the built-in default;
// unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>

#include "aeromap/fuzzy.hpp"
#include "aeromap/mission.hpp"
#include "aeromap/wall_mapper.hpp"
#include "aeromap/wire.hpp"

namespace aeromap {

struct TelemetryConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8080;
  std::int64_t watchdog_timeout_ms = 2000;
  std::int64_t tick_ms = 50;         // watchdog tick period
  std::int64_t action_period_ms = 20;  // wall-clock pacing of simulator actions
  std::string static_dir;            // served under / when set

  friend bool operator==(const TelemetryConfig&, const TelemetryConfig&) = default;
};

struct AppConfig {
  World world;
  SweepPlan plan;
  WallParams walls;
  FuzzyConfig fuzzy = FuzzyConfig::defaults();
  TelemetryConfig telemetry;
};

// 4000 x 3000 mm room with one CO2 and one VOC source.
AppConfig default_config();

// `base_dir` resolves a `fuzzy` entry given as a file path.
AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const AppConfig& cfg);
AppConfig load_config(const std::filesystem::path& path);

FuzzyConfig fuzzy_config_from_json(const Json& j);
Json to_json(const FuzzyConfig& cfg);
FuzzyConfig load_fuzzy_config(const std::filesystem::path& path);

Json to_json(const WallParams& p);
WallParams wall_params_from_json(const Json& j);

// Reads a whole file; throws ConfigError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace aeromap
