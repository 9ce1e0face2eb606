#pragma once

#include <stdexcept>
#include <string>

namespace fairheat {

// Bad input: parameters, scenario files, weather data, CLI arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A weight strategy that cannot produce weights in [0,1] for the given units.
class StrategyInapplicable : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Steady state requested outside the unclamped regime (P0 < 0).
class RegimeViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Query outside the covered time range of a series.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Non-finite state during simulation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairheat
