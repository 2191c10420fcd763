#pragma once

// Entanglement, purity, fidelity, Wigner and Gaussianity diagnostics.

#include <string>

#include "gaussify/fock.hpp"

namespace gfy {

/// Partial transpose on mode 1 of a two-mode operator.
DensityOperator partial_transpose(const DensityOperator& rho);

/// log2 of the trace norm of the partial transpose, split mode 0 | mode 1.
double logarithmic_negativity(const DensityOperator& rho);

double purity(const DensityOperator& rho);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

/// (1/2) ||rho - sigma||_1
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);

/// 1 - F(rho, moment-matched Gaussian at the same cutoff).
double gaussianity_distance(const DensityOperator& rho);

struct GridSpec {
  double xmin = -4.0;
  double xmax = 4.0;
  double pmin = -4.0;
  double pmax = 4.0;
  int points = 81;  // per axis

  double dx() const { return (xmax - xmin) / (points - 1); }
  double dp() const { return (pmax - pmin) / (points - 1); }
  double x(int i) const { return xmin + i * dx(); }
  double p(int j) const { return pmin + j * dp(); }

  /// Parses "xmin:xmax:pmin:pmax:n".
  static GridSpec parse(const std::string& text);
};

struct WignerGrid {
  GridSpec spec;
  RealMatrix values;  // values(i, j) = W(x_i, p_j)

  /// Trapezoidal integral over the grid.
  double integral() const;
  double min() const { return values.minCoeff(); }
};

/// W(x, p) with alpha = (x + i p)/sqrt(2); vacuum gives exp(-x^2 - p^2)/pi.
double wigner_at(const DensityOperator& rho, double x, double p);

/// Largest grid spacing accepted for a state with cutoff `dim`.
double max_wigner_spacing(int dim);

/// Throws ParameterError when the grid is degenerate or too coarse for the cutoff.
WignerGrid wigner(const DensityOperator& rho, const GridSpec& spec);

}  // namespace gfy
