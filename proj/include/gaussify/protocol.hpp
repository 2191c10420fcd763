#pragma once

// The two-copy Gaussification protocol: state preparation, single steps under
// each detector model, and multi-step runs.
//
// Mode order of the two copies is (Alice copy 1, Alice copy 2, Bob copy 1,
// Bob copy 2). Each party mixes its two modes on a 50/50 beam splitter,
// measures the first output, (a1 - a2)/sqrt(2), and keeps the second,
// (a1 + a2)/sqrt(2).

#include <optional>
#include <string>
#include <vector>

#include "gaussify/error.hpp"
#include "gaussify/fock.hpp"
#include "gaussify/measurements.hpp"

namespace gfy {

/// (|0,0> + eps|1,1>) / sqrt(1 + eps^2).
PureState prepare_epsilon_state(double epsilon, int dim);

/// (|0> + eps|1>) / sqrt(1 + eps^2).
PureState prepare_single_mode_epsilon_state(double epsilon, int dim);

/// Two-mode squeezed vacuum sum_n tanh(r)^n |n,n> / cosh(r), cut at `dim` and renormalized.
PureState two_mode_squeezed_vacuum(double r, int dim);

/// Two-mode squeezed vacuum with a tap of transmissivity t on each mode,
/// conditioned on a click at both tap detectors. The outcome probability is
/// the joint click probability.
MeasurementOutcome photon_subtraction(double r, double transmissivity, int dim);
DensityOperator prepare_photon_subtracted(double r, double transmissivity, int dim);

/// One step on a two-mode state where each party's measured output mode is
/// conditioned on `effect_alice` / `effect_bob`. The effects are given on
/// the output cutoff 2*dim - 1 and may be any operator (not just diagonal).
/// The retained state is cut back to the input cutoff; `leak` reports the
/// normalized weight that was cut.
MeasurementOutcome two_copy_step(const DensityOperator& rho, const Matrix& effect_alice, const Matrix& effect_bob);

/// Same step for a single-mode state (one party).
MeasurementOutcome two_copy_step_single_mode(const DensityOperator& rho, const Matrix& effect);

MeasurementOutcome one_step(const DensityOperator& rho, const DetectorModel& detector);
MeasurementOutcome one_step_single_mode(const DensityOperator& rho, const DetectorModel& detector);

/// Filtered homodyne step: both parties accept only |alpha| < x.
MeasurementOutcome homodyne_step(const DensityOperator& rho, double radius);

/// Per-outcome homodyne step: projection of the measured modes onto
/// coherent states |alpha>, |beta>. `probability` is the outcome density
/// with respect to d^2alpha d^2beta.
MeasurementOutcome homodyne_outcome_step(const DensityOperator& rho, Complex alpha, Complex beta);

enum class LeakPolicy {
  Fail,    ///< throw TruncationError once the cap is reached
  Record,  ///< keep going and report the leak in the trace
};

struct ProtocolConfig {
  double epsilon = 0.95;
  /// Overrides `epsilon` when set.
  std::optional<DensityOperator> initial_state;
  int steps = 1;
  int truncation = 6;
  int max_truncation = 10;
  DetectorModel detector;
  bool single_mode = false;
  double leak_threshold = 1e-6;
  LeakPolicy leak_policy = LeakPolicy::Fail;

  /// Throws ParameterError when a field is out of range.
  void validate() const;
  DensityOperator initial() const;
};

struct IterationRecord {
  int step = 0;
  double p_success = 1.0;
  double p_cumulative = 1.0;
  /// NaN for single-mode runs.
  double log_negativity = 0.0;
  double purity = 1.0;
  double gaussianity = 0.0;
  double leak = 0.0;
  int truncation = 0;
};

struct DistillationTrace {
  ProtocolConfig config;
  std::vector<IterationRecord> records;
  DensityOperator final_state;
};

/// Error raised by run(), carrying the failing step.
class StepError : public Error {
 public:
  StepError(int step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Record for a state at a given step, computing all diagnostics.
IterationRecord make_record(const DensityOperator& rho, int step, double p_success, double p_cumulative, double leak,
                            bool single_mode);

DistillationTrace run(const ProtocolConfig& config);

}  // namespace gfy
