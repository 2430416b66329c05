#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aeromap/room.hpp"

namespace aeromap {

// Piecewise-linear membership function. A triangle is a trapezoid with a
// single-point plateau.
struct MembershipFunction {
  enum class Shape { triangular, trapezoidal };

  Shape shape = Shape::triangular;
  double left = 0.0;
  double peak_lo = 0.0;
  double peak_hi = 0.0;
  double right = 0.0;

  static MembershipFunction triangle(double l, double m, double r);
  static MembershipFunction trapezoid(double l, double m1, double m2, double r);

  double degree(double x) const;
  // Throws ConfigError unless breakpoints are non-decreasing.
  void validate() const;

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;
};

double membership(double x, const MembershipFunction& mf);

enum class Term { low, medium, high };
enum class AirClass { good, moderate, poor };

std::string_view to_string(Term t);
std::string_view to_string(AirClass c);
Term term_from_string(std::string_view name);
AirClass air_class_from_string(std::string_view name);

// Input channels of the classifier, in canonical order.
inline constexpr std::array<Channel, 5> kFuzzyInputs = {
    Channel::voc, Channel::co2, Channel::smoke, Channel::temperature, Channel::humidity};

std::size_t fuzzy_input_index(Channel c);

struct FuzzyVariable {
  double universe_lo = 0.0;
  double universe_hi = 0.0;
  std::array<MembershipFunction, 3> terms;  // low, medium, high

  const MembershipFunction& term(Term t) const { return terms[static_cast<std::size_t>(t)]; }
  friend bool operator==(const FuzzyVariable&, const FuzzyVariable&) = default;
};

struct Rule {
  std::vector<std::pair<Channel, Term>> antecedent;  // joined by AND
  AirClass consequent = AirClass::good;
  double weight = 1.0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

inline constexpr double kOutputLo = 0.0;
inline constexpr double kOutputHi = 100.0;

struct FuzzyConfig {
  std::array<FuzzyVariable, 5> inputs;              // indexed like kFuzzyInputs
  std::array<MembershipFunction, 3> output;         // good, moderate, poor on [0, 100]
  std::vector<Rule> rules;
  int centroid_resolution = 1001;

  const FuzzyVariable& input(Channel c) const { return inputs[fuzzy_input_index(c)]; }
  FuzzyVariable& input(Channel c) { return inputs[fuzzy_input_index(c)]; }

  // Shipped default: guideline-band breakpoints and 15 single-antecedent rules.
  static FuzzyConfig defaults();
  void validate() const;

  friend bool operator==(const FuzzyConfig&, const FuzzyConfig&) = default;
};

// Uniformly sampled function on [lo, hi].
struct SampledFunction {
  double lo = kOutputLo;
  double hi = kOutputHi;
  std::vector<double> values;

  double abscissa(std::size_t i) const;
};

struct Inference {
  SampledFunction aggregate;
  std::vector<double> rule_strengths;
  std::array<double, 3> class_strengths{};  // strongest firing per output term
  std::vector<std::string> clamped;         // inputs clamped to their universe
};

struct Classification {
  double crisp_score = 0.0;
  AirClass air_class = AirClass::good;
  std::array<double, 3> class_strengths{};
  std::vector<std::string> clamped;
  bool fallback = false;  // no rule fired; class came from the crisp baseline

  friend bool operator==(const Classification&, const Classification&) = default;
};

// Discrete centroid of a sampled function. Throws NoRuleFiredError when the
// function is identically zero.
double defuzzify_centroid(const SampledFunction& agg);

// Bands: good [0, 100/3), moderate [100/3, 200/3), poor [200/3, 100].
AirClass class_for_score(double score);

// Two increasing thresholds per input: below t1 good, below t2 moderate,
// otherwise poor.
struct CrispThresholds {
  std::array<std::pair<double, double>, 5> bounds;  // indexed like kFuzzyInputs

  const std::pair<double, double>& of(Channel c) const { return bounds[fuzzy_input_index(c)]; }
  friend bool operator==(const CrispThresholds&, const CrispThresholds&) = default;
};

// Where the dominant term switches (low->medium, medium->high).
CrispThresholds crossover_thresholds(const FuzzyConfig& cfg);

AirClass crisp_classify(const SensorFrame& frame, const CrispThresholds& thresholds);

// Mamdani engine with the output terms pre-sampled.
class FuzzyEngine {
 public:
  explicit FuzzyEngine(FuzzyConfig cfg);

  const FuzzyConfig& config() const { return cfg_; }
  Inference infer(const SensorFrame& frame) const;
  // Throws NoRuleFiredError when nothing fires.
  Classification classify(const SensorFrame& frame) const;
  // As classify, but falls back to the crisp baseline instead of throwing.
  Classification classify_or_fallback(const SensorFrame& frame,
                                      const CrispThresholds& thresholds) const;

 private:
  FuzzyConfig cfg_;
  std::array<std::vector<double>, 3> output_samples_;
};

Inference infer(const SensorFrame& frame, const FuzzyConfig& cfg);
Classification classify(const SensorFrame& frame, const FuzzyConfig& cfg);

}  // namespace aeromap
