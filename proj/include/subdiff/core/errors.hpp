#pragma once

#include <stdexcept>
#include <string>

namespace subdiff {

/// Invalid or inconsistent user configuration (exit code 2 in the CLI).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation ran but its result cannot be trusted (exit code 3 in the CLI).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integral whose tail does not decay fast enough to be truncated.
class DivergenceError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Valid request that the implementation deliberately does not cover.
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace subdiff
