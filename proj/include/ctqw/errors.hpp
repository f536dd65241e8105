#pragma once

#include <stdexcept>
#include <string>

namespace ctqw {

/// Bad argument to a constructor or generator (sizes, probabilities, indices).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Matrices or vectors of incompatible dimensions were combined.
class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A random generator could not produce a valid (connected) graph within its retry budget.
class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A state failed a physical-validity requirement of the operation it was passed to.
class InvalidStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Adaptive integration gave up. `last_good_time` is the last time reached with an accepted step.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, double last_good_time)
      : std::runtime_error(what + " (last good t = " + std::to_string(last_good_time) + ")"),
        last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

private:
  double last_good_time_;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ctqw
