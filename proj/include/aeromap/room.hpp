#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "aeromap/geometry.hpp"

namespace aeromap {

using Rng = std::mt19937_64;

enum class Species { voc, co2, smoke };

std::string_view to_string(Species s);
Species species_from_string(std::string_view name);

// Channels that carry a calibrated noise target.
enum class Channel { voc, co2, smoke, temperature, humidity, battery, distance };

inline constexpr std::array<Channel, 7> kAllChannels = {
    Channel::voc,      Channel::co2,     Channel::smoke,   Channel::temperature,
    Channel::humidity, Channel::battery, Channel::distance};

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view name);

struct ChannelRange {
  double lo;
  double hi;
};

// Physical range each reading is clamped to after noise.
ChannelRange physical_range(Channel c);

// Robot pose: position in mm, heading in degrees on [0, 360).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Point position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct GasSource {
  Point position;
  Species species = Species::co2;
  double amplitude = 0.0;  // peak above ambient, species units
  double spread = 1.0;     // Gaussian sigma, mm
  Point drift;             // advection offset of the plume centre, mm

  friend bool operator==(const GasSource&, const GasSource&) = default;
};

// Mean absolute relative error targets per channel, dimensionless.
struct NoiseConfig {
  bool enabled = true;
  double voc = 0.1095;
  double co2 = 0.1063;
  double smoke = 0.1168;
  double temperature = 0.0961;
  double humidity = 0.0446;
  double battery = 0.0244;
  double distance = 0.2006;

  double target(Channel c) const;
  void set_target(Channel c, double mape);
  // Same targets with every channel except `keep` zeroed.
  NoiseConfig only(Channel keep) const;
  static NoiseConfig silent();

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

// One timestamped environmental reading. Units: voc ppb, co2 ppm,
// smoke ug/m3, temperature degC, humidity %RH, battery V.
struct SensorFrame {
  std::int64_t timestamp_ms = 0;
  double voc = 0.0;
  double co2 = 0.0;
  double smoke = 0.0;
  double temperature = 0.0;
  double humidity = 0.0;
  double battery = 0.0;

  double value(Channel c) const;
  void set_value(Channel c, double v);

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

struct Ambient {
  double voc = 100.0;
  double co2 = 420.0;
  double smoke = 10.0;
  double temperature = 26.0;
  double humidity = 55.0;

  double species(Species s) const;
  friend bool operator==(const Ambient&, const Ambient&) = default;
};

// Linear discharge between full and empty over the configured mission.
struct BatteryModel {
  double full_v = 12.6;
  double empty_v = 11.1;
  std::int64_t duration_ms = 600'000;

  double voltage_at(std::int64_t t_ms) const;
  friend bool operator==(const BatteryModel&, const BatteryModel&) = default;
};

struct World {
  RectilinearPolygon room;
  std::vector<GasSource> gas_sources;
  Ambient ambient;
  BatteryModel battery;
  NoiseConfig noise;
  std::uint64_t seed = 42;

  // Throws ConfigError when a source or noise target is out of range.
  void validate() const;
};

// Noise-free concentration of `species` at `p`. Throws DomainError outside
// the room.
double gas_field(const World& world, Point p, Species species);

// Multiplicative Gaussian noise whose mean absolute relative error equals
// `target_mape`; the result is clamped to `range`.
double apply_noise(double true_value, double target_mape, Rng& rng, ChannelRange range);

// Range to the nearest wall along an absolute bearing.
double sense_distance(const World& world, const Pose& pose, double bearing_deg, bool noise_on,
                      Rng& rng);

SensorFrame sense_gas(const World& world, const Pose& pose, bool noise_on, Rng& rng,
                      std::int64_t t_ms);

// Applies the world's per-channel noise to an already-sampled clean frame.
SensorFrame add_frame_noise(const SensorFrame& clean, const NoiseConfig& noise, Rng& rng);

}  // namespace aeromap
