#pragma once

#include <stdexcept>
#include <string>

namespace drift {

/// Invalid numeric parameter passed to a constructor or calculator.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand dimensions disagree (bit string vs. weights).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension outside what the exact representation supports (BinVal n > 63).
class UnsupportedDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Named configuration could not be resolved (unknown fitness, optimum, ...).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A theorem hypothesis that the toolkit checks was found to be violated.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An explicit chain failed validation.
class ChainValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Some non-zero state never reaches 0, so E[T] is infinite there.
class NoFiniteHittingTime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state-count or step-count cap was exceeded.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Every simulated trial hit max_steps.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature stopped at its subdivision cap; carries the partial result.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial_result() const noexcept { return partial_; }

 private:
  double partial_;
};

}  // namespace drift
