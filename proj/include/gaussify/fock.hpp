#pragma once

// Truncated multi-mode Fock space: states, operators, tensor products,
// partial traces and the optical unitaries used by the protocol.
//
// Flat indices are row-major over the mode list: mode 0 is the most
// significant digit, so tensor(A, B) is the Kronecker product A (x) B.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gfy {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermiticity = 1e-10;
inline constexpr double positivity = 1e-8;
inline constexpr double norm = 1e-10;
}  // namespace tol

class FockDims {
 public:
  FockDims() = default;
  explicit FockDims(std::vector<int> dims);
  FockDims(std::initializer_list<int> dims);

  /// Same cutoff `dim` on each of `modes` modes.
  static FockDims uniform(int modes, int dim);

  int modes() const noexcept { return static_cast<int>(dims_.size()); }
  int operator[](int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  const std::vector<int>& values() const noexcept { return dims_; }
  Eigen::Index total() const noexcept { return total_; }

  Eigen::Index flat(std::span<const int> levels) const;
  std::vector<int> multi(Eigen::Index flat) const;

  FockDims concat(const FockDims& other) const;
  FockDims select(std::span<const int> modes) const;

  friend bool operator==(const FockDims&, const FockDims&) = default;

 private:
  std::vector<int> dims_;
  Eigen::Index total_ = 1;
};

struct PureState {
  FockDims dims;
  Vector amplitudes;

  PureState() = default;
  PureState(FockDims dims, Vector amplitudes);

  /// Basis state |levels>.
  static PureState basis(const FockDims& dims, std::span<const int> levels);
  static PureState basis(const FockDims& dims, std::initializer_list<int> levels);

  double norm() const { return amplitudes.norm(); }
  PureState& normalize();
};

struct DensityOperator {
  FockDims dims;
  Matrix matrix;

  DensityOperator() = default;
  DensityOperator(FockDims dims, Matrix matrix);

  static DensityOperator from_pure(const PureState& psi);

  double trace() const { return matrix.trace().real(); }
  DensityOperator& normalize();
  bool is_hermitian(double tolerance = tol::hermiticity) const;
  double min_eigenvalue() const;
  /// Hermitian, unit trace, and no eigenvalue below -positivity tolerance.
  bool is_valid(double tolerance = tol::norm) const;
};

namespace ops {
/// Truncated annihilation operator: a|n> = sqrt(n)|n-1>.
Matrix annihilation(int dim);
Matrix creation(int dim);
Matrix number(int dim);
Matrix identity(int dim);
}  // namespace ops

PureState tensor(const PureState& a, const PureState& b);
PureState tensor(std::span<const PureState> states);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
DensityOperator tensor(std::span<const DensityOperator> states);
/// Kronecker product of plain operators.
Matrix tensor(const Matrix& a, const Matrix& b);

/// Reduced state on `keep` (in ascending mode order).
DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::initializer_list<int> keep);

/// <out_first, out_second| U |in_first, in_second> for the beam splitter
/// a^dag -> sqrt(t) a^dag + sqrt(1-t) b^dag, b^dag -> -sqrt(1-t) a^dag + sqrt(t) b^dag.
/// Zero unless photon number is conserved. Exact for any Fock levels.
double beamsplitter_amplitude(int out_first, int out_second, int in_first, int in_second,
                              double transmissivity = 0.5);

/// Two-mode beam splitter on the truncated space of side dim^2.
Matrix beamsplitter_unitary(int dim, double transmissivity = 0.5);

/// exp((s/2)(a^2 - a^dag^2)), exponentiated on a larger space and cut to `dim`,
/// so every kept matrix element is exact.
Matrix squeezer_unitary(int dim, double s);

/// exp(alpha a^dag - conj(alpha) a), exact matrix elements below `dim`.
Matrix displacement_unitary(int dim, Complex alpha);

/// Closed-form <m|D(alpha)|n> of the untruncated displacement operator.
Complex displacement_element(int m, int n, Complex alpha);

/// Applies `unitary` to the ordered `modes` of the state.
PureState apply_unitary(const PureState& psi, const Matrix& unitary, std::span<const int> modes);
DensityOperator apply_unitary(const DensityOperator& rho, const Matrix& unitary,
                              std::span<const int> modes);

/// Left-multiplies the rows of `block` (indexed by `dims`) by `op` acting on `modes`.
Matrix apply_on_modes(const FockDims& dims, const Matrix& block, const Matrix& op,
                      std::span<const int> modes);

/// Zero-pads (or cuts) every mode to `dims`; cutting discards amplitudes beyond.
DensityOperator resize(const DensityOperator& rho, const FockDims& dims);
PureState resize(const PureState& psi, const FockDims& dims);

/// Weight outside the first `dim` levels of every mode.
double weight_outside(const DensityOperator& rho, int dim);

}  // namespace gfy
