#include "aeromap/room.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "aeromap/error.hpp"

namespace aeromap {

std::string_view to_string(Species s) {
  switch (s) {
    case Species::voc:
      return "voc";
    case Species::co2:
      return "co2";
    case Species::smoke:
      return "smoke";
  }
  return "?";
}

Species species_from_string(std::string_view name) {
  if (name == "voc") return Species::voc;
  if (name == "co2") return Species::co2;
  if (name == "smoke") return Species::smoke;
  throw ConfigError("unknown gas species: " + std::string(name));
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::voc:
      return "voc";
    case Channel::co2:
      return "co2";
    case Channel::smoke:
      return "smoke";
    case Channel::temperature:
      return "temperature";
    case Channel::humidity:
      return "humidity";
    case Channel::battery:
      return "battery";
    case Channel::distance:
      return "distance";
  }
  return "?";
}

Channel channel_from_string(std::string_view name) {
  for (Channel c : kAllChannels) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown sensor channel: " + std::string(name));
}

ChannelRange physical_range(Channel c) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (c) {
    case Channel::humidity:
      return {0.0, 100.0};
    case Channel::temperature:
      return {-40.0, 125.0};
    default:
      return {0.0, inf};
  }
}

double NoiseConfig::target(Channel c) const {
  switch (c) {
    case Channel::voc:
      return voc;
    case Channel::co2:
      return co2;
    case Channel::smoke:
      return smoke;
    case Channel::temperature:
      return temperature;
    case Channel::humidity:
      return humidity;
    case Channel::battery:
      return battery;
    case Channel::distance:
      return distance;
  }
  return 0.0;
}

void NoiseConfig::set_target(Channel c, double mape) {
  switch (c) {
    case Channel::voc:
      voc = mape;
      break;
    case Channel::co2:
      co2 = mape;
      break;
    case Channel::smoke:
      smoke = mape;
      break;
    case Channel::temperature:
      temperature = mape;
      break;
    case Channel::humidity:
      humidity = mape;
      break;
    case Channel::battery:
      battery = mape;
      break;
    case Channel::distance:
      distance = mape;
      break;
  }
}

NoiseConfig NoiseConfig::only(Channel keep) const {
  NoiseConfig out = silent();
  out.enabled = enabled;
  out.set_target(keep, target(keep));
  return out;
}

NoiseConfig NoiseConfig::silent() {
  NoiseConfig n;
  for (Channel c : kAllChannels) n.set_target(c, 0.0);
  return n;
}

double SensorFrame::value(Channel c) const {
  switch (c) {
    case Channel::voc:
      return voc;
    case Channel::co2:
      return co2;
    case Channel::smoke:
      return smoke;
    case Channel::temperature:
      return temperature;
    case Channel::humidity:
      return humidity;
    case Channel::battery:
      return battery;
    case Channel::distance:
      break;
  }
  throw DomainError("sensor frame has no distance channel");
}

void SensorFrame::set_value(Channel c, double v) {
  switch (c) {
    case Channel::voc:
      voc = v;
      return;
    case Channel::co2:
      co2 = v;
      return;
    case Channel::smoke:
      smoke = v;
      return;
    case Channel::temperature:
      temperature = v;
      return;
    case Channel::humidity:
      humidity = v;
      return;
    case Channel::battery:
      battery = v;
      return;
    case Channel::distance:
      break;
  }
  throw DomainError("sensor frame has no distance channel");
}

double Ambient::species(Species s) const {
  switch (s) {
    case Species::voc:
      return voc;
    case Species::co2:
      return co2;
    case Species::smoke:
      return smoke;
  }
  return 0.0;
}

double BatteryModel::voltage_at(std::int64_t t_ms) const {
  if (duration_ms <= 0) return empty_v;
  const double frac =
      std::clamp(static_cast<double>(t_ms) / static_cast<double>(duration_ms), 0.0, 1.0);
  return full_v - (full_v - empty_v) * frac;
}

void World::validate() const {
  if (room.size() < 4) throw ConfigError("world has no room polygon");
  for (std::size_t i = 0; i < gas_sources.size(); ++i) {
    const auto& s = gas_sources[i];
    const std::string tag = "gas source " + std::to_string(i);
    if (!(s.amplitude >= 0.0)) throw ConfigError(tag + ": amplitude must be >= 0");
    if (!(s.spread > 0.0)) throw ConfigError(tag + ": spread must be > 0");
    if (!room.contains(s.position) || room.distance_to_boundary(s.position) == 0.0) {
      throw ConfigError(tag + ": position must lie strictly inside the room");
    }
  }
  for (Channel c : kAllChannels) {
    const double t = noise.target(c);
    if (!(t >= 0.0 && t < 1.0)) {
      throw ConfigError("noise target for " + std::string(to_string(c)) + " must be in [0, 1)");
    }
  }
  if (!(ambient.humidity >= 0.0 && ambient.humidity <= 100.0)) {
    throw ConfigError("ambient humidity must be in [0, 100]");
  }
  if (ambient.voc < 0.0 || ambient.co2 < 0.0 || ambient.smoke < 0.0) {
    throw ConfigError("ambient gas levels must be >= 0");
  }
  if (battery.full_v < battery.empty_v || battery.empty_v < 0.0) {
    throw ConfigError("battery model needs full_v >= empty_v >= 0");
  }
}

double gas_field(const World& world, Point p, Species species) {
  if (!world.room.contains(p)) {
    throw DomainError("gas_field query outside the room at (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ")");
  }
  double c = world.ambient.species(species);
  for (const auto& src : world.gas_sources) {
    if (src.species != species) continue;
    const double cx = src.position.x + src.drift.x;
    const double cy = src.position.y + src.drift.y;
    const double d2 = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    c += src.amplitude * std::exp(-d2 / (2.0 * src.spread * src.spread));
  }
  return c;
}

double apply_noise(double true_value, double target_mape, Rng& rng, ChannelRange range) {
  if (target_mape == 0.0) return true_value;
  // E|eps| = sigma * sqrt(2/pi) for a zero-mean Gaussian.
  const double sigma = target_mape * std::sqrt(std::numbers::pi / 2.0);
  std::normal_distribution<double> eps(0.0, sigma);
  return std::clamp(true_value * (1.0 + eps(rng)), range.lo, range.hi);
}

double sense_distance(const World& world, const Pose& pose, double bearing_deg, bool noise_on,
                      Rng& rng) {
  const auto hit = world.room.ray_cast(pose.position(), bearing_deg);
  if (!hit) {
    throw InternalError("range ray found no wall from (" + std::to_string(pose.x) + ", " +
                        std::to_string(pose.y) + ") at bearing " + std::to_string(bearing_deg));
  }
  if (!noise_on) return hit->range;
  return apply_noise(hit->range, world.noise.distance, rng, physical_range(Channel::distance));
}

SensorFrame add_frame_noise(const SensorFrame& clean, const NoiseConfig& noise, Rng& rng) {
  SensorFrame out = clean;
  for (Channel c : kAllChannels) {
    if (c == Channel::distance) continue;
    out.set_value(c, apply_noise(clean.value(c), noise.target(c), rng, physical_range(c)));
  }
  return out;
}

SensorFrame sense_gas(const World& world, const Pose& pose, bool noise_on, Rng& rng,
                      std::int64_t t_ms) {
  SensorFrame f;
  f.timestamp_ms = t_ms;
  f.voc = gas_field(world, pose.position(), Species::voc);
  f.co2 = gas_field(world, pose.position(), Species::co2);
  f.smoke = gas_field(world, pose.position(), Species::smoke);
  f.temperature = world.ambient.temperature;
  f.humidity = world.ambient.humidity;
  f.battery = world.battery.voltage_at(t_ms);
  if (noise_on) f = add_frame_noise(f, world.noise, rng);
  for (Channel c : kAllChannels) {
    if (c != Channel::distance) f.set_value(c, quantize_milli(f.value(c)));
  }
  return f;
}

}  // namespace aeromap
