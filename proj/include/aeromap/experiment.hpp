#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "aeromap/fuzzy.hpp"
#include "aeromap/room.hpp"

namespace aeromap {

// How clean trial frames are drawn.
enum class TrialSource {
  // One classifier input, picked uniformly, is uniform on [0.5*t1, 1.5*t2]
  // of its crisp thresholds, i.e. across both of its class transitions. The
  // others sit on the plateau of their `low` term, so the chosen input
  // decides the class under either classifier.
  single_channel_band,
  // Every classifier input uniform on [0.5*t1, 1.5*t2] at once.
  transition_band,
  // Noise-free readings at uniformly random positions in the room.
  world_field,
};

struct TrialOptions {
  TrialSource source = TrialSource::single_channel_band;
};

struct ErrorRates {
  std::size_t trials = 0;
  std::size_t crisp_errors = 0;
  std::size_t fuzzy_errors = 0;
  std::size_t fuzzy_fallbacks = 0;

  double crisp_rate() const { return trials ? double(crisp_errors) / double(trials) : 0.0; }
  double fuzzy_rate() const { return trials ? double(fuzzy_errors) / double(trials) : 0.0; }
};

// Each classifier is scored against its own verdict on the clean frame, so
// the rates measure sensitivity to sensor noise alone.
ErrorRates robustness_experiment(const World& world, const FuzzyConfig& cfg,
                                 const CrispThresholds& thresholds, const NoiseConfig& noise,
                                 std::size_t n_trials, Rng& rng, const TrialOptions& opts = {});

std::string_view to_string(TrialSource s);
TrialSource trial_source_from_string(std::string_view name);

SensorFrame draw_clean_frame(const World& world, const FuzzyConfig& cfg,
                             const CrispThresholds& thresholds, Rng& rng,
                             const TrialOptions& opts);

// Re-reads one clean frame `draws` times under noise.
ErrorRates flip_rates(const SensorFrame& clean, const FuzzyEngine& engine,
                      const CrispThresholds& thresholds, const NoiseConfig& noise,
                      std::size_t draws, Rng& rng);

struct AblationRow {
  Channel channel;
  ErrorRates rates;
};

// One row per classifier input with noise on that channel only. All rows
// see the same clean frames.
std::vector<AblationRow> channel_ablation(const World& world, const FuzzyConfig& cfg,
                                          const CrispThresholds& thresholds,
                                          const NoiseConfig& noise, std::size_t n_trials,
                                          std::uint64_t seed, const TrialOptions& opts = {});

}  // namespace aeromap
