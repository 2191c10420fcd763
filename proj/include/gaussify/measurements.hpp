#pragma once

// POVM elements for the three detection variants and the conditional-state
// update they induce.

#include <string>
#include <variant>

#include "gaussify/fock.hpp"

namespace gfy {

/// Outcomes rarer than this leave the conditional state undefined.
inline constexpr double kProbabilityFloor = 1e-12;

/// Single-mode POVM element. Every effect used here is either diagonal in
/// the Fock basis or a rank-one projector |phi><phi|.
class Effect {
 public:
  enum class Kind { Diagonal, RankOne };

  static Effect diagonal(RealVector weights);
  static Effect rank_one(Vector ket);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return static_cast<int>(kind_ == Kind::Diagonal ? weights_.size() : ket_.size()); }
  /// Diagonal entries (Kind::Diagonal only).
  const RealVector& weights() const;
  /// |phi> (Kind::RankOne only).
  const Vector& ket() const;

  Matrix matrix() const;
  Matrix sqrt() const;

 private:
  Effect(Kind kind, RealVector weights, Vector ket)
      : kind_(kind), weights_(std::move(weights)), ket_(std::move(ket)) {}

  Kind kind_;
  RealVector weights_;
  Vector ket_;
};

/// |0><0| ("no click" of an ideal on/off detector).
Effect vacuum_effect(int dim);

/// No-click element of an on/off detector behind binomial loss: sum (1-eta)^n |n><n|.
Effect no_click_effect(int dim, double eta);

/// Click element, the complement of no_click_effect.
Effect click_effect(int dim, double eta);

/// |alpha><alpha| from the truncated coherent amplitudes. Requires |alpha|^2 <= dim/4.
Effect coherent_projector(int dim, Complex alpha);

/// Truncated coherent amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!).
Vector coherent_amplitudes(int dim, Complex alpha);

/// Integrated coherent-state effect over the disk |alpha| < x:
/// diagonal with F(n) = gamma(n+1, x^2) / n!.
Effect filter_operator(int dim, double x);

struct IdealVacuum {
  friend bool operator==(const IdealVacuum&, const IdealVacuum&) = default;
};
struct OnOff {
  double eta;
  friend bool operator==(const OnOff&, const OnOff&) = default;
};
struct HomodyneFilter {
  double radius;
  friend bool operator==(const HomodyneFilter&, const HomodyneFilter&) = default;
};

class DetectorModel {
 public:
  using Variant = std::variant<IdealVacuum, OnOff, HomodyneFilter>;

  DetectorModel() : variant_(IdealVacuum{}) {}
  DetectorModel(IdealVacuum v) : variant_(v) {}
  DetectorModel(OnOff v);
  DetectorModel(HomodyneFilter v);

  static DetectorModel ideal() { return DetectorModel(IdealVacuum{}); }
  static DetectorModel on_off(double eta) { return DetectorModel(OnOff{eta}); }
  static DetectorModel homodyne(double radius) { return DetectorModel(HomodyneFilter{radius}); }

  /// Parses "vacuum", "onoff:<eta>" or "homodyne:<x>".
  static DetectorModel parse(const std::string& text);

  const Variant& variant() const noexcept { return variant_; }
  /// The effect a party conditions on for a successful step.
  Effect success_effect(int dim) const;
  std::string to_string() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;

 private:
  Variant variant_;
};

struct MeasurementOutcome {
  std::variant<PureState, DensityOperator> state;
  double probability = 0.0;
  /// Weight of the conditional state that fell outside the Fock cutoff.
  double leak = 0.0;

  bool is_pure() const noexcept { return std::holds_alternative<PureState>(state); }
  DensityOperator density() const;
};

/// Measures `mode` with `effect` and returns the normalized state of the
/// remaining modes together with the outcome probability. Pure inputs with
/// a rank-one effect stay pure. Throws RareOutcomeError below the floor.
MeasurementOutcome condition_on(const DensityOperator& rho, const Effect& effect, int mode);
MeasurementOutcome condition_on(const PureState& psi, const Effect& effect, int mode);

/// Outcome probability tr[(E on mode) rho] without forming the conditional state.
double outcome_probability(const DensityOperator& rho, const Effect& effect, int mode);

}  // namespace gfy
