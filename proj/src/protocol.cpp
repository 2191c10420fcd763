#include "gaussify/protocol.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "gaussify/error.hpp"
#include "gaussify/measures.hpp"

namespace gfy {

PureState prepare_epsilon_state(double epsilon, int dim) {
  if (dim < 2) throw ParameterError("the epsilon state needs a cutoff of at least 2");
  if (!std::isfinite(epsilon)) throw ParameterError("epsilon must be finite");
  const FockDims dims = FockDims::uniform(2, dim);
  Vector v = Vector::Zero(dims.total());
  v(0) = 1.0;
  v(dim + 1) = epsilon;
  PureState psi(dims, v);
  psi.normalize();
  return psi;
}

PureState prepare_single_mode_epsilon_state(double epsilon, int dim) {
  if (dim < 2) throw ParameterError("the epsilon state needs a cutoff of at least 2");
  if (!std::isfinite(epsilon)) throw ParameterError("epsilon must be finite");
  Vector v = Vector::Zero(dim);
  v(0) = 1.0;
  v(1) = epsilon;
  PureState psi(FockDims{dim}, v);
  psi.normalize();
  return psi;
}

PureState two_mode_squeezed_vacuum(double r, int dim) {
  if (dim < 1) throw ParameterError("cutoff must be >= 1");
  const double lambda = std::tanh(r);
  const FockDims dims = FockDims::uniform(2, dim);
  Vector v = Vector::Zero(dims.total());
  double c = 1.0 / std::cosh(r);
  for (int n = 0; n < dim; ++n) {
    v(n * dim + n) = c;
    c *= lambda;
  }
  PureState psi(dims, v);
  psi.normalize();
  return psi;
}

MeasurementOutcome photon_subtraction(double r, double transmissivity, int dim) {
  if (!(r > 0.0)) throw ParameterError("source squeezing must be positive");
  if (!(transmissivity > 0.0 && transmissivity < 1.0)) throw ParameterError("tap transmissivity must lie in (0,1)");
  const PureState source = two_mode_squeezed_vacuum(r, dim);

  // tap(o, m; x) = <o, m| U_t |x, 0>: transmitted o, reflected m = x - o.
  std::vector<double> tap(static_cast<std::size_t>(dim * dim), 0.0);
  for (int x = 0; x < dim; ++x)
    for (int o = 0; o <= x; ++o) tap[static_cast<std::size_t>(x * dim + o)] = beamsplitter_amplitude(o, x - o, x, 0, transmissivity);

  // Sum over click outcomes m, n >= 1 of the pure conditional branches.
  const FockDims dims = FockDims::uniform(2, dim);
  Matrix rho = Matrix::Zero(dims.total(), dims.total());
  for (int m = 1; m < dim; ++m)
    for (int n = 1; n < dim; ++n) {
      Vector branch = Vector::Zero(dims.total());
      for (int x = m; x < dim; ++x)
        for (int y = n; y < dim; ++y) {
          const Complex a = source.amplitudes(x * dim + y);
          if (a == Complex(0.0)) continue;
          branch((x - m) * dim + (y - n)) += a * tap[static_cast<std::size_t>(x * dim + x - m)] *
                                              tap[static_cast<std::size_t>(y * dim + y - n)];
        }
      rho.noalias() += branch * branch.adjoint();
    }
  const double p = rho.trace().real();
  if (!(p >= kProbabilityFloor)) throw RareOutcomeError(p);
  rho /= p;
  return MeasurementOutcome{DensityOperator(dims, std::move(rho)), p, 0.0};
}

DensityOperator prepare_photon_subtracted(double r, double transmissivity, int dim) {
  return photon_subtraction(r, transmissivity, dim).density();
}

// ---------------------------------------------------------------------------

namespace {

using SparseC = Eigen::SparseMatrix<Complex>;

struct Entry {
  int row;
  int col;
  Complex value;
};

// <m, o| U_BS |x1, o + m - x1>: m on the measured first output, o on the retained second output.
// Inputs below `dim`, outputs below 2*dim - 1.
class AmplitudeTable {
 public:
  explicit AmplitudeTable(int dim) : dim_(dim), ext_(2 * dim - 1), amp_(static_cast<std::size_t>(ext_ * ext_ * dim), 0.0) {
    for (int o = 0; o < ext_; ++o)
      for (int m = 0; m < ext_; ++m)
        for (int x1 = 0; x1 < dim; ++x1) {
          const int x2 = o + m - x1;
          if (x2 >= 0 && x2 < dim) amp_[index(o, m, x1)] = beamsplitter_amplitude(m, o, x1, x2);
        }
  }
  int dim() const { return dim_; }
  int extended() const { return ext_; }
  double operator()(int o, int m, int x1) const { return amp_[index(o, m, x1)]; }

 private:
  std::size_t index(int o, int m, int x1) const { return static_cast<std::size_t>((o * ext_ + m) * dim_ + x1); }
  int dim_;
  int ext_;
  std::vector<double> amp_;
};

// Coefficients of <o|rho''|o'> = sum C[(x1,x1'),(x2,x2')] rho[x1,x1'] rho[x2,x2'] for one party,
// with C = E[m', m] <m,o|U|x1,x2> <m',o'|U|x1',x2'>.
std::vector<Entry> contraction(const AmplitudeTable& table, const Matrix& effect, bool diagonal, int o, int op) {
  const int d = table.dim();
  const int ext = table.extended();
  std::vector<Entry> out;
  for (int x1 = 0; x1 < d; ++x1)
    for (int x2 = 0; x2 < d; ++x2) {
      const int m = x1 + x2 - o;
      if (m < 0 || m >= ext) continue;
      const double a = table(o, m, x1);
      if (a == 0.0) continue;
      for (int x1p = 0; x1p < d; ++x1p) {
        if (diagonal) {
          const int x2p = op + m - x1p;
          if (x2p < 0 || x2p >= d) continue;
          const Complex e = effect(m, m);
          if (e == Complex(0.0)) continue;
          const double b = table(op, m, x1p);
          if (b == 0.0) continue;
          out.push_back({x1 * d + x1p, x2 * d + x2p, e * a * b});
          continue;
        }
        for (int x2p = 0; x2p < d; ++x2p) {
          const int mp = x1p + x2p - op;
          if (mp < 0 || mp >= ext) continue;
          const Complex e = effect(mp, m);
          if (e == Complex(0.0)) continue;
          const double b = table(op, mp, x1p);
          if (b == 0.0) continue;
          out.push_back({x1 * d + x1p, x2 * d + x2p, e * a * b});
        }
      }
    }
  return out;
}

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex(0.0)) return false;
  return true;
}

void check_effect(const Matrix& effect, int ext) {
  if (effect.rows() != ext || effect.cols() != ext)
    throw DimensionError("measured-mode effect must act on the output cutoff " + std::to_string(ext));
}

// Retained state on the extended cutoff, before normalization.
struct ExtendedOutput {
  int modes;
  int input_dim;
  int extended;
  Matrix matrix;
};

ExtendedOutput step_two_mode(const DensityOperator& rho, const Matrix& effect_a, const Matrix& effect_b) {
  if (rho.dims.modes() != 2 || rho.dims[0] != rho.dims[1])
    throw DimensionError("two-copy step needs a two-mode state with a common cutoff");
  const int d = rho.dims[0];
  const AmplitudeTable table(d);
  const int ext = table.extended();
  check_effect(effect_a, ext);
  check_effect(effect_b, ext);
  const bool diag_a = is_diagonal(effect_a);
  const bool diag_b = is_diagonal(effect_b);

  // blocks(y*d + y', x*d + x') = rho(x*d + y, x'*d + y')
  const int d2 = d * d;
  Matrix blocks(d2, d2);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      for (int y = 0; y < d; ++y)
        for (int yp = 0; yp < d; ++yp) blocks(y * d + yp, x * d + xp) = rho.matrix(x * d + y, xp * d + yp);
  const Matrix blocks_t = blocks.transpose();

  std::vector<std::vector<Entry>> bob(static_cast<std::size_t>(ext * ext));
  for (int p = 0; p < ext; ++p)
    for (int pp = 0; pp < ext; ++pp) bob[static_cast<std::size_t>(p * ext + pp)] = contraction(table, effect_b, diag_b, p, pp);

  const Eigen::Index side = static_cast<Eigen::Index>(ext) * ext;
  Matrix out = Matrix::Zero(side, side);
  for (int o = 0; o < ext; ++o)
    for (int op = o; op < ext; ++op) {
      const auto entries = contraction(table, effect_a, diag_a, o, op);
      if (entries.empty()) continue;
      std::vector<Eigen::Triplet<Complex>> trip;
      trip.reserve(entries.size());
      for (const auto& e : entries) trip.emplace_back(e.row, e.col, e.value);
      SparseC c(d2, d2);
      c.setFromTriplets(trip.begin(), trip.end());
      // q((y1,y1'), (y2,y2')) for this (o, o')
      const Matrix q = (blocks * c) * blocks_t;
      for (int p = 0; p < ext; ++p)
        for (int pp = 0; pp < ext; ++pp) {
          if (o == op && pp < p) continue;
          Complex acc = 0.0;
          for (const auto& e : bob[static_cast<std::size_t>(p * ext + pp)]) acc += e.value * q(e.row, e.col);
          const Eigen::Index row = o * ext + p;
          const Eigen::Index col = op * ext + pp;
          out(row, col) = acc;
          out(col, row) = std::conj(acc);
        }
    }
  return ExtendedOutput{2, d, ext, std::move(out)};
}

ExtendedOutput step_single_mode(const DensityOperator& rho, const Matrix& effect) {
  if (rho.dims.modes() != 1) throw DimensionError("single-mode step needs a single-mode state");
  const int d = rho.dims[0];
  const AmplitudeTable table(d);
  const int ext = table.extended();
  check_effect(effect, ext);
  const bool diag = is_diagonal(effect);
  Matrix out = Matrix::Zero(ext, ext);
  if (!diag) {
    // E = sum_k lambda_k |phi_k><phi_k|; out = sum_k lambda_k J_k (rho x rho) J_k^dag
    // with J_k[o, (x1, x2)] = sum_m conj(phi_k[m]) <m, o|U|x1, x2>.
    const Matrix pair = tensor(rho.matrix, rho.matrix);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (effect + effect.adjoint()));
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int k = 0; k < ext; ++k) {
      const double lambda = es.eigenvalues()(k);
      if (std::abs(lambda) <= 1e-15 * scale) continue;
      const Vector phi = es.eigenvectors().col(k);
      Matrix j = Matrix::Zero(ext, d * d);
      for (int x1 = 0; x1 < d; ++x1)
        for (int x2 = 0; x2 < d; ++x2)
          for (int o = 0; o <= x1 + x2; ++o) j(o, x1 * d + x2) = std::conj(phi(x1 + x2 - o)) * table(o, x1 + x2 - o, x1);
      out.noalias() += lambda * (j * pair * j.adjoint());
    }
    out = 0.5 * (out + out.adjoint()).eval();
    return ExtendedOutput{1, d, ext, std::move(out)};
  }
  for (int o = 0; o < ext; ++o)
    for (int op = o; op < ext; ++op) {
      Complex acc = 0.0;
      for (const auto& e : contraction(table, effect, diag, o, op))
        acc += e.value * rho.matrix(e.row / d, e.row % d) * rho.matrix(e.col / d, e.col % d);
      out(o, op) = acc;
      out(op, o) = std::conj(acc);
    }
  return ExtendedOutput{1, d, ext, std::move(out)};
}

double probability_of(const ExtendedOutput& out) {
  const double p = out.matrix.trace().real();
  if (!(p >= kProbabilityFloor)) throw RareOutcomeError(p);
  return p;
}

// Cuts the extended output to `dim` per mode, returning the normalized state and the leaked weight.
std::pair<DensityOperator, double> cut(const ExtendedOutput& out, int dim) {
  const FockDims ext_dims = FockDims::uniform(out.modes, out.extended);
  const FockDims dims = FockDims::uniform(out.modes, dim);
  DensityOperator full(ext_dims, out.matrix);
  const double total = full.trace();
  DensityOperator kept = resize(full, dims);
  const double inside = kept.trace();
  if (!(inside > 0.0)) throw TruncationError(1.0, dim);
  kept.matrix /= inside;
  kept.matrix = 0.5 * (kept.matrix + kept.matrix.adjoint()).eval();
  return {std::move(kept), std::max(0.0, 1.0 - inside / total)};
}

MeasurementOutcome finish(const ExtendedOutput& out, double scale = 1.0) {
  const double p = probability_of(out);
  auto [state, leak] = cut(out, out.input_dim);
  return MeasurementOutcome{std::move(state), p * scale, leak};
}

}  // namespace

MeasurementOutcome two_copy_step(const DensityOperator& rho, const Matrix& effect_alice, const Matrix& effect_bob) {
  return finish(step_two_mode(rho, effect_alice, effect_bob));
}

MeasurementOutcome two_copy_step_single_mode(const DensityOperator& rho, const Matrix& effect) {
  return finish(step_single_mode(rho, effect));
}

MeasurementOutcome one_step(const DensityOperator& rho, const DetectorModel& detector) {
  const Matrix e = detector.success_effect(2 * rho.dims[0] - 1).matrix();
  return two_copy_step(rho, e, e);
}

MeasurementOutcome one_step_single_mode(const DensityOperator& rho, const DetectorModel& detector) {
  return two_copy_step_single_mode(rho, detector.success_effect(2 * rho.dims[0] - 1).matrix());
}

MeasurementOutcome homodyne_step(const DensityOperator& rho, double radius) {
  return one_step(rho, DetectorModel::homodyne(radius));
}

MeasurementOutcome homodyne_outcome_step(const DensityOperator& rho, Complex alpha, Complex beta) {
  const int ext = 2 * rho.dims[0] - 1;
  // Projections onto coherent states; POVM density 1/pi per measured mode.
  const Matrix ea = coherent_projector(ext, alpha).matrix();
  const Matrix eb = coherent_projector(ext, beta).matrix();
  return finish(step_two_mode(rho, ea, eb), 1.0 / (M_PI * M_PI));
}

// ---------------------------------------------------------------------------

void ProtocolConfig::validate() const {
  if (steps < 0) throw ParameterError("steps must be >= 0");
  if (truncation < 2) throw ParameterError("truncation must be >= 2");
  if (max_truncation < truncation) throw ParameterError("max_truncation must be >= truncation");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be a finite value >= 0");
  if (!(leak_threshold > 0.0)) throw ParameterError("leak threshold must be positive");
  if (initial_state) {
    const int expected = single_mode ? 1 : 2;
    if (initial_state->dims.modes() != expected)
      throw ParameterError("initial state must have " + std::to_string(expected) + " mode(s)");
    if (!initial_state->is_valid()) throw ParameterError("initial state is not a normalized density operator");
  }
}

DensityOperator ProtocolConfig::initial() const {
  const int modes = single_mode ? 1 : 2;
  const FockDims dims = FockDims::uniform(modes, truncation);
  if (!initial_state) {
    return DensityOperator::from_pure(single_mode ? prepare_single_mode_epsilon_state(epsilon, truncation)
                                                  : prepare_epsilon_state(epsilon, truncation));
  }
  for (int m = 0; m < modes; ++m)
    if (initial_state->dims[m] > truncation && weight_outside(*initial_state, truncation) > leak_threshold)
      throw ParameterError("initial state does not fit into the requested truncation");
  DensityOperator rho = resize(*initial_state, dims);
  rho.normalize();
  return rho;
}

IterationRecord make_record(const DensityOperator& rho, int step, double p_success, double p_cumulative, double leak,
                            bool single_mode) {
  IterationRecord r;
  r.step = step;
  r.p_success = p_success;
  r.p_cumulative = p_cumulative;
  r.log_negativity = single_mode ? std::numeric_limits<double>::quiet_NaN() : logarithmic_negativity(rho);
  r.purity = purity(rho);
  r.gaussianity = gaussianity_distance(rho);
  r.leak = leak;
  r.truncation = rho.dims[0];
  return r;
}

DistillationTrace run(const ProtocolConfig& config) {
  config.validate();
  DistillationTrace trace{config, {}, config.initial()};
  DensityOperator rho = trace.final_state;
  trace.records.push_back(make_record(rho, 0, 1.0, 1.0, 0.0, config.single_mode));

  double cumulative = 1.0;
  for (int step = 1; step <= config.steps; ++step) {
    try {
      const int d = rho.dims[0];
      const Matrix effect = config.detector.success_effect(2 * d - 1).matrix();
      const ExtendedOutput out = config.single_mode ? step_single_mode(rho, effect) : step_two_mode(rho, effect, effect);
      const double p = probability_of(out);

      // Grow the cutoff in steps of two while the leak is too large.
      const int cap = std::min(config.max_truncation, out.extended);
      auto [state, leak] = cut(out, d);
      for (int trial = d + 2; leak > config.leak_threshold && trial <= cap; trial += 2)
        std::tie(state, leak) = cut(out, trial);
      if (leak > config.leak_threshold && config.leak_policy == LeakPolicy::Fail)
        throw TruncationError(leak, state.dims[0]);

      rho = std::move(state);
      cumulative *= p;
      trace.records.push_back(make_record(rho, step, p, cumulative, leak, config.single_mode));
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(step, e.what());
    }
  }
  trace.final_state = std::move(rho);
  return trace;
}

}  // namespace gfy
