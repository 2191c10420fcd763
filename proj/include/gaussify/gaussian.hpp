#pragma once

// Covariance-matrix description of Gaussian states.
//
// Quadratures are ordered (x_1, p_1, ..., x_n, p_n) with x = (a + a^dag)/sqrt(2),
// p = (a - a^dag)/(i sqrt(2)), so the vacuum has gamma = I and
// gamma_jk = <{dO_j, dO_k}>.

#include <span>
#include <vector>

#include "gaussify/fock.hpp"

namespace gfy {

struct GaussianState {
  RealMatrix gamma;
  RealVector displacement;

  GaussianState() = default;
  GaussianState(RealMatrix gamma, RealVector displacement);

  static GaussianState vacuum(int modes);
  static GaussianState coherent(Complex alpha);
  static GaussianState thermal(double mean_photons);

  int modes() const noexcept { return static_cast<int>(gamma.rows() / 2); }
  bool is_symmetric(double tolerance = 1e-10) const;
  /// Smallest eigenvalue of gamma + i Omega.
  double uncertainty_margin() const;
  /// Symmetric and gamma + i Omega >= -tolerance.
  bool is_valid(double tolerance = 1e-9) const;
};

struct SymplecticMap {
  RealMatrix matrix;

  /// max |S Omega S^T - Omega|
  double symplectic_residual() const;
  bool is_symplectic(double tolerance = 1e-12) const { return symplectic_residual() <= tolerance; }
};

/// Standard symplectic form, a direct sum of [[0, 1], [-1, 0]].
RealMatrix symplectic_form(int modes);

/// Passive eight-port mixer for an ancilla mode, a measured mode and
/// `extra_modes` untouched modes, acting on (x3, p3, x2, p2, x_{1,1}, p_{1,1}, ...).
SymplecticMap appendix_S(int extra_modes);

/// Quadrature map of the two-mode beam splitter of fock.hpp:
/// Heisenberg action on (x_a, p_a, x_b, p_b) of the state's moments.
SymplecticMap beamsplitter_symplectic(double transmissivity = 0.5);

/// Single-mode squeezer exp((s/2)(a^2 - a^dag^2)): diag(e^{-s}, e^{s}).
SymplecticMap squeezer_symplectic(double s);

/// `local` on the listed modes, identity elsewhere.
SymplecticMap embed(const SymplecticMap& local, std::span<const int> modes, int total_modes);

GaussianState apply_symplectic(const GaussianState& gs, const SymplecticMap& map);

/// Direct sum of independent states, modes in argument order.
GaussianState direct_sum(const GaussianState& a, const GaussianState& b);

/// Reorders modes: output mode k is input mode order[k].
GaussianState reorder_modes(const GaussianState& gs, std::span<const int> order);

/// Marginal on the listed modes.
GaussianState reduce(const GaussianState& gs, std::span<const int> keep);

/// Projects `mode` onto the vacuum: gamma' = B - C^T (A + I)^{-1} C.
/// The returned state lives on the remaining modes in their original order.
GaussianState vacuum_condition(const GaussianState& gs, int mode);

/// Homodyne measurement of the listed quadratures (indices into the 2n vector)
/// with the given outcomes. All modes owning a measured quadrature are removed.
GaussianState homodyne_condition(const GaussianState& gs, std::span<const int> quadratures,
                                 const RealVector& outcomes);

/// Eight-port construction: vacuum ancilla on `mode`, appendix_S, homodyne of the
/// two commuting output quadratures with outcomes (u, v).
GaussianState eight_port_condition(const GaussianState& gs, int mode, double u = 0.0, double v = 0.0);

GaussianState two_mode_squeezed(double r);

/// Covariance-level prediction of one ideal protocol step on two copies of `gs`:
/// per mode k, copies k and n+k meet on a 50/50 splitter, the first output is
/// projected onto the vacuum and the second is kept.
GaussianState gaussian_step(const GaussianState& gs);

/// First moments and centered covariance of a Fock-space state.
GaussianState covariance_of_state(const DensityOperator& rho);

/// Fock matrix elements of a Gaussian state at the given cutoffs.
DensityOperator gaussian_to_fock(const GaussianState& gs, const FockDims& dims);

}  // namespace gfy
