#pragma once

#include <stdexcept>
#include <string>

namespace aeromap {

// Base for every error the library raises. Each subclass maps onto one CLI
// exit code (see tools/aeromap.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query outside the valid domain, e.g. a point outside the room polygon.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration / input document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wire document missing a required field or carrying a wrong type.
class SchemaError : public ConfigError {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : ConfigError(what), field_(field) {}
  explicit SchemaError(const std::string& field)
      : ConfigError("missing or invalid field: " + field), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Not enough data to produce a result (all points rejected, too few walls).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate input: zero-variance cluster, near-singular system,
// parallel-class intersection.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Estimated and true wall rings have a different number of corners.
class TopologyMismatchError : public Error {
 public:
  TopologyMismatchError(std::size_t estimated, std::size_t truth)
      : Error("corner count mismatch: estimated " + std::to_string(estimated) +
              ", truth " + std::to_string(truth)),
        estimated_(estimated),
        truth_(truth) {}

  std::size_t estimated() const noexcept { return estimated_; }
  std::size_t truth() const noexcept { return truth_; }

 private:
  std::size_t estimated_;
  std::size_t truth_;
};

// Motion command issued while the robot is halted.
class HaltedError : public Error {
 public:
  HaltedError() : Error("robot is halted") {}
};

// Mamdani aggregate is identically zero, no rule fired.
class NoRuleFiredError : public Error {
 public:
  NoRuleFiredError() : Error("no fuzzy rule fired") {}
};

// Broken internal invariant (e.g. a ray in a closed room that hits nothing).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace aeromap
