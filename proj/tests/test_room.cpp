#include <doctest.h>

#include <cmath>

#include "aeromap/error.hpp"
#include "aeromap/room.hpp"

using namespace aeromap;

namespace {

World co2_world(double width = 4000, double height = 3000) {
  World w;
  w.room = RectilinearPolygon::rectangle(width, height);
  w.ambient.co2 = 400;
  w.gas_sources.push_back({{1000, 1000}, Species::co2, 600, 500, {}});
  return w;
}

double empirical_mape(double target, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += std::abs(apply_noise(100.0, target, rng, {0.0, INFINITY}) - 100.0) / 100.0;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("room") {

TEST_CASE("gas field at and away from a source") {
  const World w = co2_world(20000, 3000);
  CHECK(gas_field(w, {1000, 1000}, Species::co2) == 1000.0);
  // 10 m away: Gaussian tail is far below 1e-6 ppm
  CHECK(std::abs(gas_field(w, {11000, 1000}, Species::co2) - 400.0) < 1e-6);
  // 400 + 600 e^-0.5, evaluated at 30 digits
  CHECK(gas_field(w, {1500, 1000}, Species::co2) == doctest::Approx(763.918395827580054).epsilon(1e-14));
  CHECK(gas_field(w, {1000, 1000}, Species::voc) == w.ambient.voc);
}

TEST_CASE("drift moves the plume centre") {
  World w = co2_world();
  w.gas_sources[0].drift = {200, -100};
  CHECK(gas_field(w, {1200, 900}, Species::co2) == 1000.0);
}

TEST_CASE("gas field outside the room is a domain error") {
  CHECK_THROWS_AS(gas_field(co2_world(), {-1, 5}, Species::co2), DomainError);
}

TEST_CASE("zero noise target returns the input") {
  Rng rng(1);
  for (double v : {0.0, 1.5, 763.912345, 1e9}) CHECK(apply_noise(v, 0.0, rng, {0, INFINITY}) == v);
}

TEST_CASE("noise sigma gives the requested mean absolute relative error") {
  // sigma = 0.1095 * sqrt(pi / 2) = 0.13724; E|eps| over 1e6 draws
  CHECK(std::abs(empirical_mape(0.1095, 1'000'000, 3) - 0.1095) < 0.002);
  CHECK(std::abs(empirical_mape(0.2006, 100'000, 4) - 0.2006) < 0.005);
}

TEST_CASE("noise is clamped to the channel range") {
  Rng rng(5);
  const ChannelRange h = physical_range(Channel::humidity);
  for (int i = 0; i < 10000; ++i) {
    const double v = apply_noise(99.0, 0.5, rng, h);
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
  }
}

TEST_CASE("sense_distance from the centre") {
  World w;
  w.room = RectilinearPolygon::rectangle(4000, 3000);
  Rng rng(1);
  CHECK(sense_distance(w, {2000, 1500, 0}, 0, false, rng) == 2000.0);
  CHECK(sense_distance(w, {2000, 1500, 0}, 90, false, rng) == 1500.0);
  w.room = RectilinearPolygon::rectangle(4000, 4000);
  CHECK(sense_distance(w, {2000, 2000, 0}, 45, false, rng) ==
        doctest::Approx(2828.42712474619).epsilon(1e-12));
}

TEST_CASE("sense_gas without noise") {
  World w;
  w.room = RectilinearPolygon::rectangle(4000, 3000);
  Rng rng(1);
  const SensorFrame f = sense_gas(w, {2000, 1500, 0}, false, rng, 1234);
  CHECK(f.timestamp_ms == 1234);
  CHECK(f.voc == w.ambient.voc);
  CHECK(f.co2 == w.ambient.co2);
  CHECK(f.smoke == w.ambient.smoke);
  CHECK(f.temperature == w.ambient.temperature);
  CHECK(f.humidity == w.ambient.humidity);
  const World s = co2_world();
  CHECK(sense_gas(s, {1000, 1000, 0}, false, rng, 0).co2 == 1000.0);
}

TEST_CASE("sense_gas noise per channel at a fixed pose") {
  const World w = co2_world();
  Rng rng(11);
  const Pose at{1000, 1000, 0};
  const SensorFrame clean = sense_gas(w, at, false, rng, 0);
  std::array<double, 6> sum{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const SensorFrame f = sense_gas(w, at, true, rng, 0);
    for (std::size_t c = 0; c < 6; ++c) {
      sum[c] += std::abs(f.value(kAllChannels[c]) - clean.value(kAllChannels[c])) / clean.value(kAllChannels[c]);
    }
  }
  for (std::size_t c = 0; c < 6; ++c) {
    CAPTURE(to_string(kAllChannels[c]));
    CHECK(std::abs(sum[c] / n - w.noise.target(kAllChannels[c])) < 0.005);
  }
}

TEST_CASE("battery discharges linearly") {
  BatteryModel b;
  CHECK(b.voltage_at(0) == 12.6);
  CHECK(b.voltage_at(b.duration_ms) == 11.1);
  CHECK(b.voltage_at(b.duration_ms / 2) == doctest::Approx(11.85));
  CHECK(b.voltage_at(10 * b.duration_ms) == 11.1);
}

TEST_CASE("world validation") {
  World w = co2_world();
  CHECK_NOTHROW(w.validate());
  w.gas_sources[0].position = {0, 1000};
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = co2_world();
  w.gas_sources[0].spread = 0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = co2_world();
  w.noise.distance = 1.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("channel names round-trip") {
  for (Channel c : kAllChannels) CHECK(channel_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(channel_from_string("pm25"), ConfigError);
}

}
