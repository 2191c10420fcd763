#include "gaussify/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "gaussify/error.hpp"

namespace gfy {

FockDims::FockDims(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("FockDims needs at least one mode");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw DimensionError("Fock cutoff must be >= 1, got " + std::to_string(d));
    total_ *= d;
  }
}

FockDims::FockDims(std::initializer_list<int> dims) : FockDims(std::vector<int>(dims)) {}

FockDims FockDims::uniform(int modes, int dim) {
  return FockDims(std::vector<int>(static_cast<std::size_t>(modes), dim));
}

Eigen::Index FockDims::flat(std::span<const int> levels) const {
  if (levels.size() != dims_.size()) throw DimensionError("multi-index has wrong number of modes");
  Eigen::Index idx = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (levels[m] < 0 || levels[m] >= dims_[m]) throw DimensionError("Fock level out of range");
    idx = idx * dims_[m] + levels[m];
  }
  return idx;
}

std::vector<int> FockDims::multi(Eigen::Index flat) const {
  if (flat < 0 || flat >= total_) throw DimensionError("flat index out of range");
  std::vector<int> levels(dims_.size());
  for (std::size_t m = dims_.size(); m-- > 0;) {
    levels[m] = static_cast<int>(flat % dims_[m]);
    flat /= dims_[m];
  }
  return levels;
}

FockDims FockDims::concat(const FockDims& other) const {
  std::vector<int> out = dims_;
  out.insert(out.end(), other.dims_.begin(), other.dims_.end());
  return FockDims(std::move(out));
}

FockDims FockDims::select(std::span<const int> modes) const {
  std::vector<int> out;
  out.reserve(modes.size());
  for (int m : modes) {
    if (m < 0 || m >= this->modes()) throw DimensionError("mode index " + std::to_string(m) + " out of range");
    out.push_back(dims_[static_cast<std::size_t>(m)]);
  }
  return FockDims(std::move(out));
}

// ---------------------------------------------------------------------------

PureState::PureState(FockDims d, Vector a) : dims(std::move(d)), amplitudes(std::move(a)) {
  if (amplitudes.size() != dims.total()) throw DimensionError("amplitude vector does not match dims");
}

PureState PureState::basis(const FockDims& dims, std::span<const int> levels) {
  Vector v = Vector::Zero(dims.total());
  v(dims.flat(levels)) = 1.0;
  return PureState(dims, std::move(v));
}

PureState PureState::basis(const FockDims& dims, std::initializer_list<int> levels) {
  std::vector<int> l(levels);
  return basis(dims, std::span<const int>(l));
}

PureState& PureState::normalize() {
  const double n = norm();
  if (n == 0.0) throw Error("cannot normalize the zero vector");
  amplitudes /= n;
  return *this;
}

DensityOperator::DensityOperator(FockDims d, Matrix m) : dims(std::move(d)), matrix(std::move(m)) {
  if (matrix.rows() != dims.total() || matrix.cols() != dims.total())
    throw DimensionError("density matrix does not match dims");
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
  return DensityOperator(psi.dims, psi.amplitudes * psi.amplitudes.adjoint());
}

DensityOperator& DensityOperator::normalize() {
  const double t = trace();
  if (t <= 0.0) throw Error("cannot normalize an operator with non-positive trace");
  matrix /= t;
  return *this;
}

bool DensityOperator::is_hermitian(double tolerance) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityOperator::is_valid(double tolerance) const {
  return is_hermitian() && std::abs(trace() - 1.0) <= tolerance && min_eigenvalue() >= -tol::positivity;
}

// ---------------------------------------------------------------------------

namespace ops {

Matrix annihilation(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix creation(int dim) { return annihilation(dim).adjoint(); }

Matrix number(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

}  // namespace ops

// ---------------------------------------------------------------------------

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

PureState tensor(const PureState& a, const PureState& b) {
  return PureState(a.dims.concat(b.dims), tensor(Matrix(a.amplitudes), Matrix(b.amplitudes)).col(0));
}

PureState tensor(std::span<const PureState> states) {
  if (states.empty()) throw DimensionError("tensor of an empty sequence");
  PureState out = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) out = tensor(out, states[i]);
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(a.dims.concat(b.dims), tensor(a.matrix, b.matrix));
}

DensityOperator tensor(std::span<const DensityOperator> states) {
  if (states.empty()) throw DimensionError("tensor of an empty sequence");
  DensityOperator out = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) out = tensor(out, states[i]);
  return out;
}

namespace {

// Splits every flat index of `dims` into (index over `modes`, index over the rest).
struct ModeSplit {
  FockDims target;
  Eigen::Index rest_total = 1;
  std::vector<Eigen::Index> target_index;
  std::vector<Eigen::Index> rest_index;
};

ModeSplit split_modes(const FockDims& dims, std::span<const int> modes) {
  std::vector<bool> is_target(static_cast<std::size_t>(dims.modes()), false);
  for (int m : modes) {
    if (m < 0 || m >= dims.modes()) throw DimensionError("mode index " + std::to_string(m) + " out of range");
    if (is_target[static_cast<std::size_t>(m)]) throw DimensionError("duplicate mode index");
    is_target[static_cast<std::size_t>(m)] = true;
  }
  ModeSplit s{dims.select(modes), 1, {}, {}};
  std::vector<int> rest;
  for (int m = 0; m < dims.modes(); ++m)
    if (!is_target[static_cast<std::size_t>(m)]) rest.push_back(m);
  for (int m : rest) s.rest_total *= dims[m];

  s.target_index.resize(static_cast<std::size_t>(dims.total()));
  s.rest_index.resize(static_cast<std::size_t>(dims.total()));
  for (Eigen::Index f = 0; f < dims.total(); ++f) {
    const auto levels = dims.multi(f);
    Eigen::Index t = 0, r = 0;
    for (int m : modes) t = t * dims[m] + levels[static_cast<std::size_t>(m)];
    for (int m : rest) r = r * dims[m] + levels[static_cast<std::size_t>(m)];
    s.target_index[static_cast<std::size_t>(f)] = t;
    s.rest_index[static_cast<std::size_t>(f)] = r;
  }
  return s;
}

}  // namespace

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep) {
  if (keep.empty()) throw DimensionError("partial_trace needs at least one kept mode");
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  const ModeSplit s = split_modes(rho.dims, sorted);

  // Group full indices by the traced-out multi-index.
  std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(s.rest_total));
  for (Eigen::Index f = 0; f < rho.dims.total(); ++f)
    groups[static_cast<std::size_t>(s.rest_index[static_cast<std::size_t>(f)])].push_back(f);

  Matrix out = Matrix::Zero(s.target.total(), s.target.total());
  for (const auto& g : groups)
    for (Eigen::Index i : g)
      for (Eigen::Index j : g)
        out(s.target_index[static_cast<std::size_t>(i)], s.target_index[static_cast<std::size_t>(j)]) +=
            rho.matrix(i, j);
  return DensityOperator(s.target, std::move(out));
}

DensityOperator partial_trace(const DensityOperator& rho, std::initializer_list<int> keep) {
  std::vector<int> k(keep);
  return partial_trace(rho, std::span<const int>(k));
}

// ---------------------------------------------------------------------------

namespace {

long double log_factorial(int n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

long double log_binomial(int n, int k) { return log_factorial(n) - log_factorial(k) - log_factorial(n - k); }

}  // namespace

double beamsplitter_amplitude(int out_first, int out_second, int in_first, int in_second, double transmissivity) {
  if (out_first < 0 || out_second < 0 || in_first < 0 || in_second < 0) return 0.0;
  if (out_first + out_second != in_first + in_second) return 0.0;
  const long double t = transmissivity;
  const long double st = std::sqrt(t);
  const long double sr = std::sqrt(1.0L - t);
  // (st a + sr b)^in_first (-sr a + st b)^in_second; take k a's from the first factor.
  const long double norm =
      0.5L * (log_factorial(out_first) + log_factorial(out_second) - log_factorial(in_first) - log_factorial(in_second));
  long double sum = 0.0L;
  for (int k = std::max(0, out_first - in_second); k <= std::min(in_first, out_first); ++k) {
    const int l = out_first - k;
    const long double mag = std::exp(log_binomial(in_first, k) + log_binomial(in_second, l) + norm);
    const long double weight = std::pow(st, k) * std::pow(sr, in_first - k) * std::pow(sr, l) *
                               std::pow(st, in_second - l);
    sum += ((l % 2) ? -1.0L : 1.0L) * mag * weight;
  }
  return static_cast<double>(sum);
}

Matrix beamsplitter_unitary(int dim, double transmissivity) {
  const Eigen::Index side = static_cast<Eigen::Index>(dim) * dim;
  Matrix u = Matrix::Zero(side, side);
  for (int x1 = 0; x1 < dim; ++x1)
    for (int x2 = 0; x2 < dim; ++x2)
      for (int o = 0; o <= std::min(dim - 1, x1 + x2); ++o) {
        const int m = x1 + x2 - o;
        if (m >= dim) continue;
        u(o * dim + m, x1 * dim + x2) = beamsplitter_amplitude(o, m, x1, x2, transmissivity);
      }
  return u;
}

namespace {

// Levels added above the cutoff before exponentiating, so the generator's
// edge does not reach the kept block.
int padded(int dim) { return 2 * dim + 20; }

}  // namespace

Matrix squeezer_unitary(int dim, double s) {
  if (dim < 1) throw DimensionError("squeezer needs dim >= 1");
  const RealMatrix a = ops::annihilation(padded(dim)).real();
  const RealMatrix gen = 0.5 * s * (a * a - (a * a).transpose());
  return RealMatrix(gen.exp()).topLeftCorner(dim, dim).cast<Complex>();
}

Matrix displacement_unitary(int dim, Complex alpha) {
  if (dim < 1) throw DimensionError("displacement needs dim >= 1");
  const Matrix a = ops::annihilation(padded(dim));
  const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp().topLeftCorner(dim, dim);
}

Complex displacement_element(int m, int n, Complex alpha) {
  // <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^{(m-n)}(|alpha|^2) for m >= n.
  if (m < n) {
    // <m|D(alpha)|n> = conj(<n|D(-alpha)|m>)
    return std::conj(displacement_element(n, m, -alpha));
  }
  const int k = m - n;
  const double x = std::norm(alpha);
  // Generalized Laguerre L_n^{(k)}(x) by upward recurrence in n.
  double l_prev = 1.0;
  double l_curr = 1.0 + k - x;
  double laguerre = (n == 0) ? 1.0 : l_curr;
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0 + k - x) * l_curr - (j + k) * l_prev) / (j + 1.0);
    l_prev = l_curr;
    l_curr = next;
    laguerre = next;
  }
  const double log_ratio = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0));
  const double r = std::abs(alpha);
  const Complex phase = (r > 0.0) ? std::pow(alpha / r, k) : Complex(k == 0 ? 1.0 : 0.0);
  const double magnitude = (k == 0) ? std::exp(log_ratio - 0.5 * x)
                           : (r > 0.0 ? std::exp(log_ratio + k * std::log(r) - 0.5 * x) : 0.0);
  return phase * magnitude * laguerre;
}

// ---------------------------------------------------------------------------

Matrix apply_on_modes(const FockDims& dims, const Matrix& block, const Matrix& op, std::span<const int> modes) {
  if (block.rows() != dims.total()) throw DimensionError("operand rows do not match dims");
  const ModeSplit s = split_modes(dims, modes);
  if (op.rows() != s.target.total() || op.cols() != s.target.total())
    throw DimensionError("operator does not match the target modes");

  // rows_of[r][t] = full index with rest index r and target index t.
  std::vector<std::vector<Eigen::Index>> rows_of(static_cast<std::size_t>(s.rest_total),
                                                  std::vector<Eigen::Index>(static_cast<std::size_t>(s.target.total())));
  for (Eigen::Index f = 0; f < dims.total(); ++f)
    rows_of[static_cast<std::size_t>(s.rest_index[static_cast<std::size_t>(f)])]
           [static_cast<std::size_t>(s.target_index[static_cast<std::size_t>(f)])] = f;

  Matrix out(block.rows(), block.cols());
  Matrix gathered(s.target.total(), block.cols());
  for (const auto& rows : rows_of) {
    for (std::size_t t = 0; t < rows.size(); ++t) gathered.row(static_cast<Eigen::Index>(t)) = block.row(rows[t]);
    const Matrix mapped = op * gathered;
    for (std::size_t t = 0; t < rows.size(); ++t) out.row(rows[t]) = mapped.row(static_cast<Eigen::Index>(t));
  }
  return out;
}

PureState apply_unitary(const PureState& psi, const Matrix& unitary, std::span<const int> modes) {
  Matrix col = psi.amplitudes;
  return PureState(psi.dims, apply_on_modes(psi.dims, col, unitary, modes).col(0));
}

DensityOperator apply_unitary(const DensityOperator& rho, const Matrix& unitary, std::span<const int> modes) {
  const Matrix left = apply_on_modes(rho.dims, rho.matrix, unitary, modes);
  const Matrix both = apply_on_modes(rho.dims, Matrix(left.adjoint()), unitary, modes);
  return DensityOperator(rho.dims, both.adjoint());
}

// ---------------------------------------------------------------------------

namespace {

// Index map from `from` into `to`; -1 where a level is cut off.
std::vector<Eigen::Index> embedding(const FockDims& from, const FockDims& to) {
  if (from.modes() != to.modes()) throw DimensionError("resize cannot change the number of modes");
  std::vector<Eigen::Index> map(static_cast<std::size_t>(from.total()));
  for (Eigen::Index f = 0; f < from.total(); ++f) {
    const auto levels = from.multi(f);
    bool inside = true;
    for (int m = 0; m < from.modes(); ++m) inside = inside && levels[static_cast<std::size_t>(m)] < to[m];
    map[static_cast<std::size_t>(f)] = inside ? to.flat(levels) : -1;
  }
  return map;
}

}  // namespace

DensityOperator resize(const DensityOperator& rho, const FockDims& dims) {
  const auto map = embedding(rho.dims, dims);
  Matrix out = Matrix::Zero(dims.total(), dims.total());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] < 0) continue;
    for (std::size_t j = 0; j < map.size(); ++j)
      if (map[j] >= 0) out(map[i], map[j]) = rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return DensityOperator(dims, std::move(out));
}

PureState resize(const PureState& psi, const FockDims& dims) {
  const auto map = embedding(psi.dims, dims);
  Vector out = Vector::Zero(dims.total());
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map[i] >= 0) out(map[i]) = psi.amplitudes(static_cast<Eigen::Index>(i));
  return PureState(dims, std::move(out));
}

double weight_outside(const DensityOperator& rho, int dim) {
  double inside = 0.0;
  for (Eigen::Index f = 0; f < rho.dims.total(); ++f) {
    const auto levels = rho.dims.multi(f);
    if (std::all_of(levels.begin(), levels.end(), [dim](int l) { return l < dim; })) inside += rho.matrix(f, f).real();
  }
  return rho.trace() - inside;
}

}  // namespace gfy
