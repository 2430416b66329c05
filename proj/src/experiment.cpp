#include "aeromap/experiment.hpp"

#include <string>

#include "aeromap/error.hpp"

namespace aeromap {

std::string_view to_string(TrialSource s) {
  switch (s) {
    case TrialSource::single_channel_band:
      return "single_channel_band";
    case TrialSource::transition_band:
      return "transition_band";
    case TrialSource::world_field:
      return "world_field";
  }
  return "?";
}

TrialSource trial_source_from_string(std::string_view name) {
  if (name == "single_channel_band") return TrialSource::single_channel_band;
  if (name == "transition_band") return TrialSource::transition_band;
  if (name == "world_field") return TrialSource::world_field;
  throw ConfigError("unknown trial source: " + std::string(name));
}

SensorFrame draw_clean_frame(const World& world, const FuzzyConfig& cfg,
                             const CrispThresholds& thresholds, Rng& rng,
                             const TrialOptions& opts) {
  SensorFrame f;
  f.battery = world.battery.full_v;
  const auto band = [&](Channel c) {
    const auto [t1, t2] = thresholds.of(c);
    return std::uniform_real_distribution<double>(0.5 * t1, 1.5 * t2)(rng);
  };
  switch (opts.source) {
    case TrialSource::world_field: {
      const auto [lo, hi] = world.room.bounds();
      std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const Pose pose{ux(rng), uy(rng), 0.0};
        if (!world.room.contains(pose.position())) continue;
        return sense_gas(world, pose, false, rng, 0);
      }
      throw DegenerateError("could not draw a position inside the room");
    }
    case TrialSource::transition_band:
      for (Channel c : kFuzzyInputs) f.set_value(c, band(c));
      return f;
    case TrialSource::single_channel_band: {
      std::uniform_int_distribution<std::size_t> pick(0, kFuzzyInputs.size() - 1);
      const Channel chosen = kFuzzyInputs[pick(rng)];
      for (Channel c : kFuzzyInputs) {
        if (c == chosen) {
          f.set_value(c, band(c));
        } else {
          const FuzzyVariable& v = cfg.input(c);
          const double top = v.term(Term::low).peak_hi;
          f.set_value(c, std::uniform_real_distribution<double>(v.universe_lo, top)(rng));
        }
      }
      return f;
    }
  }
  return f;
}

namespace {

struct Verdicts {
  AirClass crisp;
  AirClass fuzzy;
  bool fallback;
};

Verdicts judge(const SensorFrame& f, const FuzzyEngine& engine, const CrispThresholds& th) {
  const Classification c = engine.classify_or_fallback(f, th);
  return {crisp_classify(f, th), c.air_class, c.fallback};
}

void tally(ErrorRates& r, const Verdicts& clean, const Verdicts& noisy) {
  ++r.trials;
  if (noisy.crisp != clean.crisp) ++r.crisp_errors;
  if (noisy.fuzzy != clean.fuzzy) ++r.fuzzy_errors;
  if (noisy.fallback) ++r.fuzzy_fallbacks;
}

NoiseConfig enabled(NoiseConfig n) {
  n.enabled = true;
  return n;
}

}  // namespace

ErrorRates flip_rates(const SensorFrame& clean, const FuzzyEngine& engine,
                      const CrispThresholds& thresholds, const NoiseConfig& noise,
                      std::size_t draws, Rng& rng) {
  const Verdicts ref = judge(clean, engine, thresholds);
  const NoiseConfig n = enabled(noise);
  ErrorRates r;
  for (std::size_t i = 0; i < draws; ++i) {
    tally(r, ref, judge(add_frame_noise(clean, n, rng), engine, thresholds));
  }
  return r;
}

ErrorRates robustness_experiment(const World& world, const FuzzyConfig& cfg,
                                 const CrispThresholds& thresholds, const NoiseConfig& noise,
                                 std::size_t n_trials, Rng& rng, const TrialOptions& opts) {
  cfg.validate();
  const FuzzyEngine engine(cfg);
  const NoiseConfig n = enabled(noise);
  ErrorRates r;
  for (std::size_t i = 0; i < n_trials; ++i) {
    const SensorFrame clean = draw_clean_frame(world, cfg, thresholds, rng, opts);
    tally(r, judge(clean, engine, thresholds),
          judge(add_frame_noise(clean, n, rng), engine, thresholds));
  }
  return r;
}

std::vector<AblationRow> channel_ablation(const World& world, const FuzzyConfig& cfg,
                                          const CrispThresholds& thresholds,
                                          const NoiseConfig& noise, std::size_t n_trials,
                                          std::uint64_t seed, const TrialOptions& opts) {
  std::vector<AblationRow> rows;
  for (Channel c : kFuzzyInputs) {
    Rng rng(seed);
    rows.push_back({c, robustness_experiment(world, cfg, thresholds, noise.only(c), n_trials,
                                             rng, opts)});
  }
  return rows;
}

}  // namespace aeromap
