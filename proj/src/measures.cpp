#include "gaussify/measures.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gaussify/error.hpp"
#include "gaussify/gaussian.hpp"

namespace gfy {

DensityOperator partial_transpose(const DensityOperator& rho) {
  if (rho.dims.modes() != 2) throw DimensionError("partial transpose needs a two-mode operator");
  const int da = rho.dims[0];
  const int db = rho.dims[1];
  Matrix out(rho.matrix.rows(), rho.matrix.cols());
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k)
        for (int l = 0; l < db; ++l) out(i * db + j, k * db + l) = rho.matrix(i * db + l, k * db + j);
  return DensityOperator(rho.dims, std::move(out));
}

namespace {

RealVector hermitian_eigenvalues(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

// Eigenvalues below this fraction of the largest are round-off and count as zero.
constexpr double kRelativeZero = 1e-14;

RealVector clamp_small(const RealVector& ev) {
  const double cut = kRelativeZero * ev.cwiseAbs().maxCoeff();
  return ev.unaryExpr([cut](double x) { return x > cut ? x : 0.0; });
}

Matrix hermitian_sqrt(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const RealVector root = clamp_small(es.eigenvalues()).cwiseSqrt();
  return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

void check_same_dims(const DensityOperator& a, const DensityOperator& b) {
  if (!(a.dims == b.dims)) throw DimensionError("operators live on different spaces");
}

}  // namespace

double logarithmic_negativity(const DensityOperator& rho) {
  const double norm = hermitian_eigenvalues(partial_transpose(rho).matrix).cwiseAbs().sum();
  return std::max(0.0, std::log2(norm));
}

double purity(const DensityOperator& rho) {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.matrix.squaredNorm();
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_dims(rho, sigma);
  const Matrix root = hermitian_sqrt(rho.matrix);
  const RealVector ev = hermitian_eigenvalues(root * sigma.matrix * root);
  const double f = clamp_small(ev).cwiseSqrt().sum();
  return f * f;
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_dims(rho, sigma);
  return 0.5 * hermitian_eigenvalues(rho.matrix - sigma.matrix).cwiseAbs().sum();
}

double gaussianity_distance(const DensityOperator& rho) {
  const GaussianState moments = covariance_of_state(rho);
  if (!moments.is_valid(1e-6)) throw CovarianceError("moment matrix of the state is not a valid covariance");
  DensityOperator reference = gaussian_to_fock(moments, rho.dims);
  reference.matrix = 0.5 * (reference.matrix + reference.matrix.adjoint()).eval();
  reference.normalize();
  return std::max(0.0, 1.0 - fidelity(rho, reference));
}

// ---------------------------------------------------------------------------

GridSpec GridSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 5) throw ParameterError("grid spec must be xmin:xmax:pmin:pmax:n, got '" + text + "'");
  GridSpec g;
  try {
    std::size_t used = 0;
    double* fields[] = {&g.xmin, &g.xmax, &g.pmin, &g.pmax};
    for (int i = 0; i < 4; ++i) {
      *fields[i] = std::stod(parts[static_cast<std::size_t>(i)], &used);
      if (used != parts[static_cast<std::size_t>(i)].size()) throw std::invalid_argument("trailing characters");
    }
    g.points = std::stoi(parts[4], &used);
    if (used != parts[4].size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ParameterError("cannot parse grid spec '" + text + "'");
  }
  if (!(g.xmax > g.xmin) || !(g.pmax > g.pmin) || g.points < 2) throw ParameterError("grid spec '" + text + "' is degenerate");
  return g;
}

double WignerGrid::integral() const {
  const int n = spec.points;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n; ++j) {
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      sum += wi * wj * values(i, j);
    }
  }
  return sum * spec.dx() * spec.dp();
}

namespace {

double wigner_value(const Matrix& rho, int dim, Complex alpha) {
  // W = (1/pi) sum_{n,m} rho[n,m] (-1)^n <m|D(2 alpha)|n>
  const Complex two_alpha = 2.0 * alpha;
  Complex acc = 0.0;
  for (int n = 0; n < dim; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    for (int m = 0; m < dim; ++m) acc += sign * rho(n, m) * displacement_element(m, n, two_alpha);
  }
  return acc.real() / M_PI;
}

}  // namespace

double wigner_at(const DensityOperator& rho, double x, double p) {
  if (rho.dims.modes() != 1) throw DimensionError("Wigner function needs a single-mode state");
  return wigner_value(rho.matrix, rho.dims[0], Complex(x, p) / std::sqrt(2.0));
}

double max_wigner_spacing(int dim) { return 1.0 / std::sqrt(2.0 * dim); }

WignerGrid wigner(const DensityOperator& rho, const GridSpec& spec) {
  if (rho.dims.modes() != 1) throw DimensionError("Wigner function needs a single-mode state");
  if (spec.points < 2 || !(spec.xmax > spec.xmin) || !(spec.pmax > spec.pmin)) throw ParameterError("degenerate Wigner grid");
  const double limit = max_wigner_spacing(rho.dims[0]);
  if (spec.dx() > limit || spec.dp() > limit)
    throw ParameterError("Wigner grid too coarse: spacing must not exceed " + std::to_string(limit) + " at cutoff " +
                         std::to_string(rho.dims[0]));
  WignerGrid grid{spec, RealMatrix(spec.points, spec.points)};
  const int dim = rho.dims[0];
  for (int i = 0; i < spec.points; ++i)
    for (int j = 0; j < spec.points; ++j)
      grid.values(i, j) = wigner_value(rho.matrix, dim, Complex(spec.x(i), spec.p(j)) / std::sqrt(2.0));
  return grid;
}

}  // namespace gfy
