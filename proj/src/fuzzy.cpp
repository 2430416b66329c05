#include "aeromap/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "aeromap/error.hpp"
#include "aeromap/kernels.hpp"

namespace aeromap {

MembershipFunction MembershipFunction::triangle(double l, double m, double r) {
  return {Shape::triangular, l, m, m, r};
}

MembershipFunction MembershipFunction::trapezoid(double l, double m1, double m2, double r) {
  return {Shape::trapezoidal, l, m1, m2, r};
}

double MembershipFunction::degree(double x) const {
  if (x >= peak_lo && x <= peak_hi) return 1.0;
  if (x < peak_lo) {
    if (x <= left) return 0.0;
    return (x - left) / (peak_lo - left);
  }
  if (x >= right) return 0.0;
  return (right - x) / (right - peak_hi);
}

void MembershipFunction::validate() const {
  if (!(left <= peak_lo && peak_lo <= peak_hi && peak_hi <= right)) {
    throw ConfigError("membership breakpoints must be non-decreasing");
  }
  if (shape == Shape::triangular && peak_lo != peak_hi) {
    throw ConfigError("triangular membership has a single peak");
  }
}

double membership(double x, const MembershipFunction& mf) { return mf.degree(x); }

std::string_view to_string(Term t) {
  switch (t) {
    case Term::low:
      return "low";
    case Term::medium:
      return "medium";
    case Term::high:
      return "high";
  }
  return "?";
}

std::string_view to_string(AirClass c) {
  switch (c) {
    case AirClass::good:
      return "Good";
    case AirClass::moderate:
      return "Moderate";
    case AirClass::poor:
      return "Poor";
  }
  return "?";
}

Term term_from_string(std::string_view name) {
  if (name == "low") return Term::low;
  if (name == "medium") return Term::medium;
  if (name == "high") return Term::high;
  throw ConfigError("unknown input term: " + std::string(name));
}

AirClass air_class_from_string(std::string_view name) {
  if (name == "Good" || name == "good") return AirClass::good;
  if (name == "Moderate" || name == "moderate") return AirClass::moderate;
  if (name == "Poor" || name == "poor") return AirClass::poor;
  throw ConfigError("unknown air quality class: " + std::string(name));
}

std::size_t fuzzy_input_index(Channel c) {
  for (std::size_t i = 0; i < kFuzzyInputs.size(); ++i) {
    if (kFuzzyInputs[i] == c) return i;
  }
  throw ConfigError("channel " + std::string(to_string(c)) + " is not a classifier input");
}

FuzzyConfig FuzzyConfig::defaults() {
  using MF = MembershipFunction;
  FuzzyConfig cfg;
  cfg.input(Channel::co2) = {0.0, 5000.0,
                             {MF::trapezoid(0, 0, 600, 1000), MF::triangle(600, 1000, 1400),
                              MF::trapezoid(1000, 1400, 5000, 5000)}};
  cfg.input(Channel::voc) = {0.0, 60000.0,
                             {MF::trapezoid(0, 0, 220, 660), MF::triangle(220, 660, 2200),
                              MF::trapezoid(660, 2200, 60000, 60000)}};
  cfg.input(Channel::smoke) = {0.0, 1000.0,
                               {MF::trapezoid(0, 0, 50, 150), MF::triangle(50, 150, 250),
                                MF::trapezoid(150, 250, 1000, 1000)}};
  cfg.input(Channel::temperature) = {0.0, 50.0,
                                     {MF::trapezoid(0, 0, 18, 22), MF::triangle(18, 24, 30),
                                      MF::trapezoid(26, 30, 50, 50)}};
  cfg.input(Channel::humidity) = {0.0, 100.0,
                                  {MF::trapezoid(0, 0, 30, 40), MF::triangle(30, 50, 70),
                                   MF::trapezoid(60, 70, 100, 100)}};
  cfg.output = {MF::triangle(0, 0, 50), MF::triangle(25, 50, 75), MF::triangle(50, 100, 100)};
  for (Channel c : kFuzzyInputs) {
    cfg.rules.push_back({{{c, Term::low}}, AirClass::good, 1.0});
    cfg.rules.push_back({{{c, Term::medium}}, AirClass::moderate, 1.0});
    cfg.rules.push_back({{{c, Term::high}}, AirClass::poor, 1.0});
  }
  return cfg;
}

void FuzzyConfig::validate() const {
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& v = inputs[i];
    if (!(v.universe_lo < v.universe_hi)) {
      throw ConfigError("input " + std::string(to_string(kFuzzyInputs[i])) +
                        ": universe must have lo < hi");
    }
    for (const auto& mf : v.terms) mf.validate();
  }
  for (const auto& mf : output) {
    mf.validate();
    if (mf.left < kOutputLo || mf.right > kOutputHi) {
      throw ConfigError("output membership functions must lie on [0, 100]");
    }
  }
  if (centroid_resolution < 2) throw ConfigError("centroid_resolution must be >= 2");
  if (rules.empty()) throw ConfigError("rulebase is empty");
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const auto& rule = rules[r];
    if (rule.antecedent.empty()) {
      throw ConfigError("rule " + std::to_string(r) + " has an empty antecedent");
    }
    std::set<Channel> seen;
    for (const auto& [channel, term] : rule.antecedent) {
      (void)term;
      fuzzy_input_index(channel);
      if (!seen.insert(channel).second) {
        throw ConfigError("rule " + std::to_string(r) + " names " +
                          std::string(to_string(channel)) + " twice");
      }
    }
    if (!(rule.weight >= 0.0 && rule.weight <= 1.0)) {
      throw ConfigError("rule " + std::to_string(r) + " weight must be in [0, 1]");
    }
  }
}

double SampledFunction::abscissa(std::size_t i) const {
  const std::size_t n = values.size();
  // Multiply before dividing so integer-valued abscissae come out exact.
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

double defuzzify_centroid(const SampledFunction& agg) {
  const std::size_t n = agg.values.size();
  if (n < 2) throw DomainError("centroid needs at least 2 samples");
  const double total = kernels::sum(agg.values);
  if (!(total > 0.0)) throw NoRuleFiredError();
  // sum(z*mu)/sum(mu), rewritten around the midpoint with mirror-image
  // samples paired, so a symmetric aggregate lands exactly on its axis.
  const std::size_t half = n / 2;
  std::vector<double> offsets(half), diffs(half);
  const double step = (agg.hi - agg.lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < half; ++j) {
    const std::size_t hi_idx = n - 1 - j;
    offsets[j] = (static_cast<double>(hi_idx) - static_cast<double>(n - 1) / 2.0) * step;
    diffs[j] = agg.values[hi_idx] - agg.values[j];
  }
  const double numerator = kernels::weighted_sums(offsets, diffs).weighted;
  const double mid = 0.5 * (agg.lo + agg.hi);
  return mid + numerator / total;
}

AirClass class_for_score(double score) {
  if (score < 100.0 / 3.0) return AirClass::good;
  if (score < 200.0 / 3.0) return AirClass::moderate;
  return AirClass::poor;
}

namespace {

// x where the falling edge of `lower` meets the rising edge of `upper`.
double dominance_switch(const MembershipFunction& lower, const MembershipFunction& upper) {
  std::set<double> pts{lower.peak_hi, lower.right, upper.left, upper.peak_lo};
  const double a = std::min(lower.peak_hi, upper.left);
  const double b = std::max(lower.right, upper.peak_lo);
  pts.insert(a);
  pts.insert(b);
  std::vector<double> xs;
  for (double p : pts) {
    if (p >= a && p <= b) xs.push_back(p);
  }
  auto f = [&](double x) { return lower.degree(x) - upper.degree(x); };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double f0 = f(xs[i]);
    const double f1 = f(xs[i + 1]);
    if (f0 > 0.0 && f1 <= 0.0) {
      return xs[i] + (xs[i + 1] - xs[i]) * f0 / (f0 - f1);
    }
  }
  throw ConfigError("adjacent membership functions never cross");
}

}  // namespace

CrispThresholds crossover_thresholds(const FuzzyConfig& cfg) {
  CrispThresholds t;
  for (std::size_t i = 0; i < kFuzzyInputs.size(); ++i) {
    const auto& v = cfg.inputs[i];
    t.bounds[i] = {dominance_switch(v.terms[0], v.terms[1]),
                   dominance_switch(v.terms[1], v.terms[2])};
  }
  return t;
}

AirClass crisp_classify(const SensorFrame& frame, const CrispThresholds& thresholds) {
  AirClass worst = AirClass::good;
  for (std::size_t i = 0; i < kFuzzyInputs.size(); ++i) {
    const double x = frame.value(kFuzzyInputs[i]);
    const auto [t1, t2] = thresholds.bounds[i];
    const AirClass c = x < t1 ? AirClass::good : x < t2 ? AirClass::moderate : AirClass::poor;
    worst = std::max(worst, c);
  }
  return worst;
}

FuzzyEngine::FuzzyEngine(FuzzyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  SampledFunction grid{kOutputLo, kOutputHi,
                       std::vector<double>(static_cast<std::size_t>(cfg_.centroid_resolution))};
  for (std::size_t t = 0; t < 3; ++t) {
    auto& samples = output_samples_[t];
    samples.resize(grid.values.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = cfg_.output[t].degree(grid.abscissa(i));
    }
  }
}

Inference FuzzyEngine::infer(const SensorFrame& frame) const {
  Inference out;
  std::array<std::array<double, 3>, 5> degrees{};
  for (std::size_t i = 0; i < kFuzzyInputs.size(); ++i) {
    const auto& var = cfg_.inputs[i];
    double x = frame.value(kFuzzyInputs[i]);
    if (x < var.universe_lo || x > var.universe_hi || std::isnan(x)) {
      out.clamped.emplace_back(to_string(kFuzzyInputs[i]));
      x = std::isnan(x) ? var.universe_lo : std::clamp(x, var.universe_lo, var.universe_hi);
    }
    for (std::size_t t = 0; t < 3; ++t) degrees[i][t] = var.terms[t].degree(x);
  }
  out.rule_strengths.reserve(cfg_.rules.size());
  for (const auto& rule : cfg_.rules) {
    double strength = 1.0;
    for (const auto& [channel, term] : rule.antecedent) {
      strength = std::min(strength,
                          degrees[fuzzy_input_index(channel)][static_cast<std::size_t>(term)]);
    }
    strength *= rule.weight;
    out.rule_strengths.push_back(strength);
    auto& best = out.class_strengths[static_cast<std::size_t>(rule.consequent)];
    best = std::max(best, strength);
  }
  // Clipping each rule's consequent and taking the pointwise max equals
  // clipping each output term once at its strongest firing.
  out.aggregate.values.assign(output_samples_[0].size(), 0.0);
  for (std::size_t t = 0; t < 3; ++t) {
    if (out.class_strengths[t] <= 0.0) continue;
    kernels::clip_max_accumulate(out.aggregate.values, output_samples_[t], out.class_strengths[t]);
  }
  return out;
}

Classification FuzzyEngine::classify(const SensorFrame& frame) const {
  Inference inf = infer(frame);
  Classification c;
  c.crisp_score = defuzzify_centroid(inf.aggregate);
  c.air_class = class_for_score(c.crisp_score);
  c.class_strengths = inf.class_strengths;
  c.clamped = std::move(inf.clamped);
  return c;
}

Classification FuzzyEngine::classify_or_fallback(const SensorFrame& frame,
                                                 const CrispThresholds& thresholds) const {
  try {
    return classify(frame);
  } catch (const NoRuleFiredError&) {
    Classification c;
    c.air_class = crisp_classify(frame, thresholds);
    // Band midpoints keep the score inside its class band.
    c.crisp_score = c.air_class == AirClass::good       ? 50.0 / 3.0
                    : c.air_class == AirClass::moderate ? 50.0
                                                        : 250.0 / 3.0;
    c.fallback = true;
    return c;
  }
}

Inference infer(const SensorFrame& frame, const FuzzyConfig& cfg) {
  return FuzzyEngine(cfg).infer(frame);
}

Classification classify(const SensorFrame& frame, const FuzzyConfig& cfg) {
  return FuzzyEngine(cfg).classify(frame);
}

}  // namespace aeromap
