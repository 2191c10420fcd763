#pragma once

#include <stdexcept>
#include <string>

namespace gfy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or mode indices do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A physical parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A conditioning event has probability below the rare-outcome floor.
class RareOutcomeError : public Error {
 public:
  explicit RareOutcomeError(double probability)
      : Error("outcome too rare, conditional state undefined (p = " + std::to_string(probability) + ")"),
        probability_(probability) {}
  double probability() const noexcept { return probability_; }

 private:
  double probability_;
};

/// The state carries more weight outside the Fock cutoff than the run tolerates.
class TruncationError : public Error {
 public:
  TruncationError(double leak, int truncation)
      : Error("truncation overflow: leaked weight " + std::to_string(leak) + " at cutoff " +
              std::to_string(truncation)),
        leak_(leak),
        truncation_(truncation) {}
  double leak() const noexcept { return leak_; }
  int truncation() const noexcept { return truncation_; }

 private:
  double leak_;
  int truncation_;
};

/// Covariance matrix that is not a physical (or not an invertible) input.
class CovarianceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfy
