#include "gaussify/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaussify/error.hpp"

namespace gfy {

GaussianState::GaussianState(RealMatrix g, RealVector d) : gamma(std::move(g)), displacement(std::move(d)) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0 || gamma.rows() == 0)
    throw DimensionError("covariance matrix must be 2n x 2n");
  if (displacement.size() != gamma.rows()) throw DimensionError("displacement length does not match covariance");
}

GaussianState GaussianState::vacuum(int modes) {
  return GaussianState(RealMatrix::Identity(2 * modes, 2 * modes), RealVector::Zero(2 * modes));
}

GaussianState GaussianState::coherent(Complex alpha) {
  RealVector d(2);
  d << std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag();
  return GaussianState(RealMatrix::Identity(2, 2), d);
}

GaussianState GaussianState::thermal(double mean_photons) {
  if (mean_photons < 0.0) throw ParameterError("thermal occupation must be non-negative");
  return GaussianState((2.0 * mean_photons + 1.0) * RealMatrix::Identity(2, 2), RealVector::Zero(2));
}

bool GaussianState::is_symmetric(double tolerance) const {
  return (gamma - gamma.transpose()).cwiseAbs().maxCoeff() <= tolerance;
}

double GaussianState::uncertainty_margin() const {
  const Matrix h = gamma.cast<Complex>() + Complex(0.0, 1.0) * symplectic_form(modes()).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool GaussianState::is_valid(double tolerance) const {
  return is_symmetric() && uncertainty_margin() >= -tolerance;
}

RealMatrix symplectic_form(int modes) {
  RealMatrix omega = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

double SymplecticMap::symplectic_residual() const {
  const RealMatrix omega = symplectic_form(static_cast<int>(matrix.rows() / 2));
  return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMap appendix_S(int extra_modes) {
  if (extra_modes < 0) throw DimensionError("extra_modes must be >= 0");
  const double a = 1.0 / std::sqrt(2.0);
  const int n = 4 + 2 * extra_modes;
  RealMatrix s = RealMatrix::Zero(n, n);
  // rows in the order (x3, p3, x2, p2)
  s(0, 0) = a;
  s(0, 3) = a;
  s(1, 1) = a;
  s(1, 2) = -a;
  s(2, 1) = a;
  s(2, 2) = a;
  s(3, 0) = -a;
  s(3, 3) = a;
  s.bottomRightCorner(2 * extra_modes, 2 * extra_modes).setIdentity();
  return SymplecticMap{s};
}

SymplecticMap beamsplitter_symplectic(double transmissivity) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) throw ParameterError("transmissivity must lie in [0,1]");
  const double c = std::sqrt(transmissivity);
  const double s = std::sqrt(1.0 - transmissivity);
  // <(a, b)>_out = M^T <(a, b)>_in for U a U^dag = c a + s b, U b U^dag = -s a + c b.
  RealMatrix m(4, 4);
  m << c, 0, -s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, s, 0, c;
  return SymplecticMap{m};
}

SymplecticMap squeezer_symplectic(double s) {
  RealMatrix m = RealMatrix::Zero(2, 2);
  m(0, 0) = std::exp(-s);
  m(1, 1) = std::exp(s);
  return SymplecticMap{m};
}

SymplecticMap embed(const SymplecticMap& local, std::span<const int> modes, int total_modes) {
  if (local.matrix.rows() != 2 * static_cast<Eigen::Index>(modes.size()))
    throw DimensionError("local map does not match the number of modes");
  RealMatrix m = RealMatrix::Identity(2 * total_modes, 2 * total_modes);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] < 0 || modes[i] >= total_modes) throw DimensionError("mode index out of range");
    for (std::size_t j = 0; j < modes.size(); ++j)
      m.block<2, 2>(2 * modes[i], 2 * modes[j]) =
          local.matrix.block<2, 2>(2 * static_cast<Eigen::Index>(i), 2 * static_cast<Eigen::Index>(j));
  }
  return SymplecticMap{m};
}

GaussianState apply_symplectic(const GaussianState& gs, const SymplecticMap& map) {
  if (map.matrix.rows() != gs.gamma.rows() || map.matrix.cols() != gs.gamma.cols())
    throw DimensionError("symplectic map does not match the state");
  return GaussianState(map.matrix * gs.gamma * map.matrix.transpose(), map.matrix * gs.displacement);
}

GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const Eigen::Index na = a.gamma.rows(), nb = b.gamma.rows();
  RealMatrix g = RealMatrix::Zero(na + nb, na + nb);
  g.topLeftCorner(na, na) = a.gamma;
  g.bottomRightCorner(nb, nb) = b.gamma;
  RealVector d(na + nb);
  d << a.displacement, b.displacement;
  return GaussianState(g, d);
}

namespace {

std::vector<int> quadratures_of(std::span<const int> modes) {
  std::vector<int> q;
  for (int m : modes) {
    q.push_back(2 * m);
    q.push_back(2 * m + 1);
  }
  return q;
}

RealMatrix take(const RealMatrix& m, std::span<const int> rows, std::span<const int> cols) {
  RealMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

RealVector take(const RealVector& v, std::span<const int> idx) {
  RealVector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

std::vector<int> modes_except(int total, std::span<const int> removed) {
  std::vector<int> keep;
  for (int m = 0; m < total; ++m)
    if (std::find(removed.begin(), removed.end(), m) == removed.end()) keep.push_back(m);
  return keep;
}

void check_mode_index(const GaussianState& gs, int mode) {
  if (mode < 0 || mode >= gs.modes()) throw DimensionError("mode " + std::to_string(mode) + " out of range");
}

}  // namespace

GaussianState reorder_modes(const GaussianState& gs, std::span<const int> order) {
  if (static_cast<int>(order.size()) != gs.modes()) throw DimensionError("order must list every mode once");
  for (int m : order) check_mode_index(gs, m);
  const auto q = quadratures_of(order);
  return GaussianState(take(gs.gamma, q, q), take(gs.displacement, q));
}

GaussianState reduce(const GaussianState& gs, std::span<const int> keep) {
  for (int m : keep) check_mode_index(gs, m);
  const auto q = quadratures_of(keep);
  return GaussianState(take(gs.gamma, q, q), take(gs.displacement, q));
}

GaussianState vacuum_condition(const GaussianState& gs, int mode) {
  check_mode_index(gs, mode);
  if (gs.modes() < 2) throw DimensionError("vacuum conditioning needs a remaining mode");
  const int measured[] = {mode};
  const auto keep = modes_except(gs.modes(), measured);
  const auto q2 = quadratures_of(measured);
  const auto q1 = quadratures_of(keep);

  const RealMatrix a2 = take(gs.gamma, q2, q2);
  const RealMatrix c = take(gs.gamma, q2, q1);
  const RealMatrix b1 = take(gs.gamma, q1, q1);
  const RealMatrix shifted = a2 + RealMatrix::Identity(2, 2);
  Eigen::FullPivLU<RealMatrix> lu(shifted);
  if (!lu.isInvertible() || std::abs(shifted.determinant()) < 1e-14)
    throw CovarianceError("A + I is numerically singular; covariance input is invalid");
  const RealMatrix gain = c.transpose() * lu.inverse();
  return GaussianState(b1 - gain * c, take(gs.displacement, q1) - gain * take(gs.displacement, q2));
}

GaussianState homodyne_condition(const GaussianState& gs, std::span<const int> quadratures, const RealVector& outcomes) {
  if (static_cast<Eigen::Index>(quadratures.size()) != outcomes.size())
    throw DimensionError("one outcome per measured quadrature");
  std::vector<int> measured_modes;
  for (int q : quadratures) {
    if (q < 0 || q >= 2 * gs.modes()) throw DimensionError("quadrature index out of range");
    if (std::find(measured_modes.begin(), measured_modes.end(), q / 2) == measured_modes.end())
      measured_modes.push_back(q / 2);
  }
  const auto keep = modes_except(gs.modes(), measured_modes);
  if (keep.empty()) throw DimensionError("homodyne conditioning needs a remaining mode");
  const auto q1 = quadratures_of(keep);

  // Schur complement onto the measured quadratures; restricted to that
  // subspace the pseudo-inverse of Pi A Pi is the ordinary inverse.
  const RealMatrix aq = take(gs.gamma, quadratures, quadratures);
  const RealMatrix cq = take(gs.gamma, quadratures, q1);
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(aq);
  const RealMatrix pinv = cod.pseudoInverse();
  const RealMatrix gain = cq.transpose() * pinv;
  const RealMatrix gamma = take(gs.gamma, q1, q1) - gain * cq;
  const RealVector d = take(gs.displacement, q1) + gain * (outcomes - take(gs.displacement, quadratures));
  return GaussianState(gamma, d);
}

GaussianState eight_port_condition(const GaussianState& gs, int mode, double u, double v) {
  check_mode_index(gs, mode);
  if (gs.modes() < 2) throw DimensionError("eight-port conditioning needs a remaining mode");
  // Arrange as (ancilla 3, measured 2, rest 1...) to match appendix_S.
  std::vector<int> order{mode};
  for (int m = 0; m < gs.modes(); ++m)
    if (m != mode) order.push_back(m);
  const GaussianState arranged = direct_sum(GaussianState::vacuum(1), reorder_modes(gs, order));
  const GaussianState mixed = apply_symplectic(arranged, appendix_S(gs.modes() - 1));
  // x3' = (x3 + p2)/sqrt2 and x2' = (x2 + p3)/sqrt2 commute.
  const int quads[] = {0, 2};
  RealVector outcomes(2);
  outcomes << u, v;
  return homodyne_condition(mixed, quads, outcomes);
}

GaussianState two_mode_squeezed(double r) {
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  RealMatrix g(4, 4);
  g << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return GaussianState(g, RealVector::Zero(4));
}

GaussianState gaussian_step(const GaussianState& gs) {
  const int n = gs.modes();
  GaussianState both = direct_sum(gs, gs);
  for (int k = 0; k < n; ++k) {
    const int pair[] = {k, n + k};
    both = apply_symplectic(both, embed(beamsplitter_symplectic(), pair, 2 * n));
  }
  // first outputs sit at modes 0..n-1; each conditioning removes mode 0
  for (int k = 0; k < n; ++k) both = vacuum_condition(both, 0);
  return both;
}

// ---------------------------------------------------------------------------

namespace {

// Unitary map from (x_1, p_1, ..., x_n, p_n) to (a_1..a_n, a_1^dag..a_n^dag).
Matrix quadrature_to_ladder(int n) {
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  Matrix w = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    w(k, 2 * k) = h;
    w(k, 2 * k + 1) = i * h;
    w(n + k, 2 * k) = h;
    w(n + k, 2 * k + 1) = -i * h;
  }
  return w;
}

}  // namespace

GaussianState covariance_of_state(const DensityOperator& rho) {
  const int n = rho.dims.modes();
  std::vector<Matrix> lowered(static_cast<std::size_t>(n));  // a_k rho
  Vector mean(n);
  for (int k = 0; k < n; ++k) {
    const int mode[] = {k};
    lowered[static_cast<std::size_t>(k)] = apply_on_modes(rho.dims, rho.matrix, ops::annihilation(rho.dims[k]), mode);
    mean(k) = lowered[static_cast<std::size_t>(k)].trace();
  }
  // N_jk = <a_j^dag a_k> - conj(<a_j>)<a_k>, M_jk = <a_j a_k> - <a_j><a_k>.
  Matrix nmat(n, n), mmat(n, n);
  for (int j = 0; j < n; ++j) {
    const int mode[] = {j};
    for (int k = 0; k < n; ++k) {
      const Matrix& ak_rho = lowered[static_cast<std::size_t>(k)];
      // tr(a_j a_k rho): lower ket twice.
      mmat(j, k) = apply_on_modes(rho.dims, ak_rho, ops::annihilation(rho.dims[j]), mode).trace() - mean(j) * mean(k);
      // tr(a_k rho a_j^dag) = conj(tr(a_j (a_k rho)^dag))
      const Matrix bra_lowered = apply_on_modes(rho.dims, Matrix(ak_rho.adjoint()), ops::annihilation(rho.dims[j]), mode);
      nmat(j, k) = std::conj(bra_lowered.trace()) - std::conj(mean(j)) * mean(k);
    }
  }
  Matrix sigma(2 * n, 2 * n);
  sigma.topLeftCorner(n, n) = nmat.transpose() + 0.5 * Matrix::Identity(n, n);
  sigma.topRightCorner(n, n) = mmat;
  sigma.bottomLeftCorner(n, n) = mmat.conjugate();
  sigma.bottomRightCorner(n, n) = nmat + 0.5 * Matrix::Identity(n, n);

  const Matrix w = quadrature_to_ladder(n);
  const Matrix real_cov = w.adjoint() * sigma * w;
  RealMatrix gamma = 2.0 * real_cov.real();
  gamma = 0.5 * (gamma + gamma.transpose());
  RealVector d(2 * n);
  for (int k = 0; k < n; ++k) {
    d(2 * k) = std::sqrt(2.0) * mean(k).real();
    d(2 * k + 1) = std::sqrt(2.0) * mean(k).imag();
  }
  return GaussianState(gamma, d);
}

DensityOperator gaussian_to_fock(const GaussianState& gs, const FockDims& dims) {
  const int n = gs.modes();
  if (dims.modes() != n) throw DimensionError("cutoff list does not match the number of modes");
  const Matrix w = quadrature_to_ladder(n);
  const Matrix sigma = w * (0.5 * gs.gamma.cast<Complex>()) * w.adjoint();
  const Matrix sigma_q = sigma + 0.5 * Matrix::Identity(2 * n, 2 * n);
  Eigen::FullPivLU<Matrix> lu(sigma_q);
  if (!lu.isInvertible()) throw CovarianceError("Q-function covariance is singular");
  const Matrix q_inv = lu.inverse();
  const Vector beta = w * gs.displacement.cast<Complex>();

  Matrix x = Matrix::Zero(2 * n, 2 * n);
  x.topRightCorner(n, n).setIdentity();
  x.bottomLeftCorner(n, n).setIdentity();
  // Generating function G(z) = T exp(z^T B z / 2 + c^T z), z = (conj(alpha), alpha).
  const Matrix b = (Matrix::Identity(2 * n, 2 * n) - q_inv) * x;
  const Vector c = q_inv * beta;
  const Complex t = std::exp(-0.5 * (beta.adjoint() * q_inv * beta)(0, 0)) / std::sqrt(lu.determinant());

  // Index k = (m_1..m_n, l_1..l_n) over the 2n variables, each below its cutoff.
  std::vector<int> extent(static_cast<std::size_t>(2 * n));
  for (int k = 0; k < n; ++k) extent[static_cast<std::size_t>(k)] = extent[static_cast<std::size_t>(n + k)] = dims[k];
  std::vector<Eigen::Index> stride(static_cast<std::size_t>(2 * n));
  Eigen::Index total = 1;
  for (int v = 2 * n; v-- > 0;) {
    stride[static_cast<std::size_t>(v)] = total;
    total *= extent[static_cast<std::size_t>(v)];
  }

  // R_k = (d^k G)(0) / sqrt(k!):
  // R_{k+e_i} = (c_i R_k + sum_j B_ij sqrt(k_j) R_{k-e_j}) / sqrt(k_i + 1).
  std::vector<Complex> r(static_cast<std::size_t>(total), Complex(0.0));
  r[0] = t;
  std::vector<int> k(static_cast<std::size_t>(2 * n), 0);
  for (Eigen::Index flat = 1; flat < total; ++flat) {
    Eigen::Index rem = flat;
    for (int v = 0; v < 2 * n; ++v) {
      k[static_cast<std::size_t>(v)] = static_cast<int>(rem / stride[static_cast<std::size_t>(v)]);
      rem %= stride[static_cast<std::size_t>(v)];
    }
    int i = 0;
    while (k[static_cast<std::size_t>(i)] == 0) ++i;
    const Eigen::Index prev = flat - stride[static_cast<std::size_t>(i)];
    k[static_cast<std::size_t>(i)] -= 1;
    Complex acc = c(i) * r[static_cast<std::size_t>(prev)];
    for (int j = 0; j < 2 * n; ++j) {
      const int kj = k[static_cast<std::size_t>(j)];
      if (kj == 0 || b(i, j) == Complex(0.0)) continue;
      acc += b(i, j) * std::sqrt(static_cast<double>(kj)) * r[static_cast<std::size_t>(prev - stride[static_cast<std::size_t>(j)])];
    }
    r[static_cast<std::size_t>(flat)] = acc / std::sqrt(static_cast<double>(k[static_cast<std::size_t>(i)] + 1));
  }

  const Eigen::Index side = dims.total();
  Matrix rho(side, side);
  for (Eigen::Index row = 0; row < side; ++row)
    for (Eigen::Index col = 0; col < side; ++col) rho(row, col) = r[static_cast<std::size_t>(row * side + col)];
  return DensityOperator(dims, rho);
}

}  // namespace gfy
