#include <cmath>
#include <random>

#include "doctest.h"
#include "gaussify/error.hpp"
#include "gaussify/measures.hpp"
#include "gaussify/protocol.hpp"
#include "oracles.hpp"

using namespace gfy;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityOperator random_mixed(std::mt19937& rng, int modes, int d, int rank) {
  std::normal_distribution<double> normal;
  const FockDims dims = FockDims::uniform(modes, d);
  Matrix g(dims.total(), rank);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (int k = 0; k < rank; ++k) g(i, k) = Complex(normal(rng), normal(rng)) / double(1 + i);
  DensityOperator rho(dims, g * g.adjoint());
  rho.normalize();
  return rho;
}

DensityOperator pad(const DensityOperator& rho, int d) { return resize(rho, FockDims::uniform(rho.dims.modes(), d)); }

// Checks a library step against the index-loop oracle, both as probability and normalized kept state.
void check_against_oracle(const DensityOperator& rho, const Matrix& ea, const Matrix& eb, const MeasurementOutcome& got,
                          double scale = 1.0) {
  const int d = rho.dims[0];
  const int D = 2 * d - 1;
  const Matrix full = oracle::brute_force_step(rho.matrix, d, ea, eb);
  CHECK(std::abs(got.probability - scale * full.trace().real()) < 1e-12);
  Matrix kept = oracle::cut(full, D, d);
  const double inside = kept.trace().real();
  kept /= inside;
  CHECK(max_abs(got.density().matrix - kept) < 1e-12);
  CHECK(std::abs(got.leak - (1.0 - inside / full.trace().real())) < 1e-12);
}

// Tr_measured[(E x I) U (rho x rho) U^dag] for one mode on cutoff D.
Matrix dense_single_mode_step(const DensityOperator& rho, const Matrix& effect) {
  const int d = rho.dims[0];
  const int D = 2 * d - 1;
  const Matrix r = pad(rho, D).matrix;
  const Matrix u = oracle::beamsplitter(D);
  const Matrix big = u * tensor(r, r) * u.adjoint();
  Matrix out = Matrix::Zero(D, D);
  for (int o = 0; o < D; ++o)
    for (int op = 0; op < D; ++op)
      for (int m = 0; m < D; ++m)
        for (int mp = 0; mp < D; ++mp) out(o, op) += effect(mp, m) * big(m * D + o, mp * D + op);
  return out;
}

}  // namespace

TEST_CASE("epsilon states") {
  const PureState psi = prepare_epsilon_state(0.95, 6);
  CHECK(psi.dims == FockDims::uniform(2, 6));
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(psi.amplitudes(0).real() == doctest::Approx(1.0 / std::sqrt(1.0 + 0.95 * 0.95)));
  CHECK(psi.amplitudes(7).real() == doctest::Approx(0.95 / std::sqrt(1.0 + 0.95 * 0.95)));
  const double expected = std::log2((1.0 + 0.95) * (1.0 + 0.95) / (1.0 + 0.95 * 0.95));
  CHECK(std::abs(logarithmic_negativity(DensityOperator::from_pure(psi)) - expected) < 1e-12);
  CHECK(std::abs(oracle::schmidt_log_negativity(psi.amplitudes, 6) - expected) < 1e-12);

  const PureState one = prepare_single_mode_epsilon_state(0.5, 4);
  CHECK(one.amplitudes(1).real() == doctest::Approx(0.5 / std::sqrt(1.25)));
  CHECK_THROWS_AS(prepare_epsilon_state(0.5, 1), ParameterError);
  CHECK_THROWS_AS(prepare_epsilon_state(NAN, 4), ParameterError);
}

TEST_CASE("vacuum is a fixed point for every detector") {
  const DensityOperator vac = DensityOperator::from_pure(PureState::basis(FockDims::uniform(2, 4), {0, 0}));
  for (const DetectorModel& det : {DetectorModel::ideal(), DetectorModel::on_off(0.3), DetectorModel::on_off(1.0),
                                   DetectorModel::homodyne(0.4)}) {
    const MeasurementOutcome out = one_step(vac, det);
    CHECK(max_abs(out.density().matrix - vac.matrix) < 1e-14);
    CHECK(out.leak == 0.0);
  }
  CHECK(one_step(vac, DetectorModel::on_off(0.3)).probability == doctest::Approx(1.0).epsilon(1e-14));
  const double f0 = 1.0 - std::exp(-0.16);
  CHECK(one_step(vac, DetectorModel::homodyne(0.4)).probability == doctest::Approx(f0 * f0).epsilon(1e-13));

  const DensityOperator vac1 = DensityOperator::from_pure(PureState::basis(FockDims{5}, {0}));
  const MeasurementOutcome s = one_step_single_mode(vac1, DetectorModel::ideal());
  CHECK(max_abs(s.density().matrix - vac1.matrix) < 1e-15);
  CHECK(s.probability == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-mode step against the index-loop oracle") {
  const int d = 4, D = 7;
  const DensityOperator eps = DensityOperator::from_pure(prepare_epsilon_state(0.95, d));
  std::mt19937 rng(5);
  const DensityOperator mixed = random_mixed(rng, 2, d, 3);

  SUBCASE("ideal vacuum") {
    const Matrix e = vacuum_effect(D).matrix();
    check_against_oracle(eps, e, e, one_step(eps, DetectorModel::ideal()));
    check_against_oracle(mixed, e, e, one_step(mixed, DetectorModel::ideal()));
  }
  SUBCASE("on/off") {
    const Matrix e = no_click_effect(D, 0.6).matrix();
    check_against_oracle(mixed, e, e, one_step(mixed, DetectorModel::on_off(0.6)));
  }
  SUBCASE("filter") {
    const Matrix e = filter_operator(D, 0.3).matrix();
    check_against_oracle(eps, e, e, homodyne_step(eps, 0.3));
  }
  SUBCASE("different effects per party") {
    const Matrix ea = no_click_effect(D, 0.2).matrix();
    const Matrix eb = filter_operator(D, 0.7).matrix();
    check_against_oracle(mixed, ea, eb, two_copy_step(mixed, ea, eb));
  }
  SUBCASE("coherent outcomes") {
    const Complex alpha(0.2, 0.1), beta(0.0, -0.3);
    const Matrix ea = coherent_projector(D, alpha).matrix();
    const Matrix eb = coherent_projector(D, beta).matrix();
    check_against_oracle(mixed, ea, eb, homodyne_outcome_step(mixed, alpha, beta), 1.0 / (M_PI * M_PI));
  }
}

TEST_CASE("single-mode step against a dense oracle") {
  std::mt19937 rng(9);
  const int d = 3, D = 5;
  const DensityOperator rho = random_mixed(rng, 1, d, 2);
  for (const Matrix& e : {Matrix(vacuum_effect(D).matrix()), Matrix(no_click_effect(D, 0.4).matrix()),
                          Matrix(coherent_projector(D, Complex(0.3, -0.2)).matrix())}) {
    const Matrix full = dense_single_mode_step(rho, e);
    const MeasurementOutcome got = two_copy_step_single_mode(rho, e);
    CHECK(std::abs(got.probability - full.trace().real()) < 1e-12);
    Matrix kept = full.topLeftCorner(d, d);
    kept /= kept.trace().real();
    CHECK(max_abs(got.density().matrix - kept) < 1e-12);
  }
  CHECK_THROWS_AS(two_copy_step_single_mode(rho, Matrix::Identity(4, 4)), DimensionError);
}

TEST_CASE("one ideal step increases the log-negativity") {
  const DensityOperator rho = DensityOperator::from_pure(prepare_epsilon_state(0.95, 6));
  const MeasurementOutcome out = one_step(rho, DetectorModel::ideal());
  const double gain = logarithmic_negativity(out.density()) - logarithmic_negativity(rho);
  CHECK(gain > 0.005);
  CHECK(out.probability > 0.0);
  CHECK(out.probability < 1.0);
  CHECK(out.density().is_valid());
}

TEST_CASE("step commutes with identical squeezers") {
  // Equal squeezers on both inputs commute with the 50/50 splitter, so stepping S rho S^dag
  // with a vacuum projection equals S (step of rho with effect S^dag|0><0|S) S^dag.
  const int d = 15, D = 29;
  const DensityOperator rho = pad(DensityOperator::from_pure(prepare_single_mode_epsilon_state(0.6, 2)), d);
  for (double s : {0.15, -0.25}) {
    const Matrix sq = squeezer_unitary(d, s);
    DensityOperator squeezed(FockDims{d}, sq * rho.matrix * sq.adjoint());
    squeezed.normalize();
    const DensityOperator lhs = one_step_single_mode(squeezed, DetectorModel::ideal()).density();

    const Vector v = squeezer_unitary(D, -s).col(0);
    const DensityOperator inner = two_copy_step_single_mode(rho, v * v.adjoint()).density();
    DensityOperator rhs(FockDims{d}, sq * inner.matrix * sq.adjoint());
    rhs.normalize();
    CHECK(trace_distance(lhs, rhs) < 1e-6);
  }
}

TEST_CASE("filter limits") {
  const DensityOperator rho = DensityOperator::from_pure(prepare_epsilon_state(0.95, 5));
  const MeasurementOutcome ideal = one_step(rho, DetectorModel::ideal());
  const MeasurementOutcome narrow = homodyne_step(rho, 0.02);
  CHECK(trace_distance(narrow.density(), ideal.density()) < 1e-5);
  // F(0)^2 ~ x^4 per party pair
  CHECK(narrow.probability / std::pow(0.02, 4) == doctest::Approx(ideal.probability).epsilon(1e-3));
  CHECK_THROWS_AS(homodyne_step(rho, 1e-5), RareOutcomeError);

  // coherent outcome at the origin is the vacuum projection
  const MeasurementOutcome origin = homodyne_outcome_step(rho, 0.0, 0.0);
  CHECK(max_abs(origin.density().matrix - ideal.density().matrix) < 1e-14);
  CHECK(origin.probability == doctest::Approx(ideal.probability / (M_PI * M_PI)).epsilon(1e-13));
}

TEST_CASE("detector efficiency limits") {
  std::mt19937 rng(3);
  const DensityOperator rho = random_mixed(rng, 2, 4, 2);
  const MeasurementOutcome ideal = one_step(rho, DetectorModel::ideal());
  const MeasurementOutcome perfect = one_step(rho, DetectorModel::on_off(1.0));
  CHECK(max_abs(perfect.density().matrix - ideal.density().matrix) == 0.0);
  CHECK(perfect.probability == ideal.probability);

  // a blind detector always reports no click
  const MeasurementOutcome blind = one_step(rho, DetectorModel::on_off(0.0));
  CHECK(blind.probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(blind.density().is_valid());
}

TEST_CASE("log-negativity grows with detector efficiency") {
  const DensityOperator rho = DensityOperator::from_pure(prepare_epsilon_state(0.95, 6));
  double last = -1.0;
  for (double eta : {0.1, 0.3, 0.5, 0.8, 1.0}) {
    const double e = logarithmic_negativity(one_step(rho, DetectorModel::on_off(eta)).density());
    CHECK(e >= last - 1e-9);
    last = e;
  }
}

TEST_CASE("run") {
  ProtocolConfig c;
  c.steps = 0;
  DistillationTrace t = run(c);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].step == 0);
  CHECK(t.records[0].p_cumulative == 1.0);
  CHECK(t.records[0].log_negativity == doctest::Approx(std::log2(1.95 * 1.95 / (1.0 + 0.95 * 0.95))).epsilon(1e-12));
  CHECK(t.records[0].purity == doctest::Approx(1.0).epsilon(1e-12));

  c.steps = 2;
  c.truncation = 5;
  c.max_truncation = 5;
  c.leak_policy = LeakPolicy::Record;
  t = run(c);
  REQUIRE(t.records.size() == 3);
  const MeasurementOutcome one = one_step(c.initial(), c.detector);
  CHECK(t.records[1].p_success == doctest::Approx(one.probability).epsilon(1e-14));
  CHECK(t.records[1].leak == doctest::Approx(one.leak).epsilon(1e-12));
  CHECK(t.records[2].p_cumulative == doctest::Approx(t.records[1].p_success * t.records[2].p_success).epsilon(1e-14));
  CHECK(t.records[2].truncation == 5);

  c.single_mode = true;
  t = run(c);
  CHECK(std::isnan(t.records[1].log_negativity));

  ProtocolConfig bad;
  bad.truncation = 1;
  CHECK_THROWS_AS(run(bad), ParameterError);
  bad = ProtocolConfig{};
  bad.max_truncation = 4;
  CHECK_THROWS_AS(run(bad), ParameterError);
  bad = ProtocolConfig{};
  bad.initial_state = DensityOperator::from_pure(prepare_single_mode_epsilon_state(0.5, 4));
  CHECK_THROWS_AS(run(bad), ParameterError);
}

TEST_CASE("adaptive truncation and leak policy") {
  ProtocolConfig c;
  c.steps = 5;
  try {
    run(c);
    FAIL("expected a truncation failure");
  } catch (const StepError& e) {
    CHECK(e.step() == 4);
  }
  c.leak_policy = LeakPolicy::Record;
  // levels double per step, so nothing leaks before step 3
  c.steps = 3;
  const DistillationTrace t = run(c);
  CHECK(t.records[2].leak == 0.0);
  CHECK(t.records[3].truncation > c.truncation);
  CHECK(t.records[3].truncation <= c.max_truncation);
}

TEST_CASE("Gaussianity distance decreases along the protocol") {
  ProtocolConfig c;
  c.steps = 3;
  c.max_truncation = 10;
  c.leak_policy = LeakPolicy::Record;
  const DistillationTrace two = run(c);
  for (std::size_t k = 1; k < two.records.size(); ++k) CHECK(two.records[k].gaussianity < two.records[k - 1].gaussianity);

  c.single_mode = true;
  c.steps = 3;
  const DistillationTrace one = run(c);
  for (std::size_t k = 1; k < one.records.size(); ++k) CHECK(one.records[k].gaussianity < one.records[k - 1].gaussianity);
}

TEST_CASE("narrow filtering tracks the ideal protocol over two steps") {
  ProtocolConfig c;
  c.steps = 2;
  c.max_truncation = 6;
  c.leak_policy = LeakPolicy::Record;
  const DistillationTrace ideal = run(c);
  c.detector = DetectorModel::homodyne(0.1);
  const DistillationTrace filtered = run(c);
  CHECK(trace_distance(ideal.final_state, filtered.final_state) < 5e-3);
}

TEST_CASE("photon subtraction") {
  const double r = 0.5;
  const int d = 8;
  SUBCASE("dense construction") {
    const double t = 0.9;
    // (A, tap A, B, tap B); taps start in vacuum and the reflected ports are detected
    const PureState source = two_mode_squeezed_vacuum(r, d);
    const FockDims four = FockDims::uniform(4, d);
    Vector amp = Vector::Zero(four.total());
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y) {
        const int levels[] = {x, 0, y, 0};
        amp(four.flat(levels)) = source.amplitudes(x * d + y);
      }
    PureState psi(four, amp);
    const Matrix u = beamsplitter_unitary(d, t);
    const int pa[] = {0, 1}, pb[] = {2, 3};
    psi = apply_unitary(apply_unitary(psi, u, pa), u, pb);
    Matrix rho = Matrix::Zero(d * d, d * d);
    for (int m = 1; m < d; ++m)
      for (int n = 1; n < d; ++n) {
        Vector branch(d * d);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            const int levels[] = {a, m, b, n};
            branch(a * d + b) = psi.amplitudes(four.flat(levels));
          }
        rho += branch * branch.adjoint();
      }
    const double p = rho.trace().real();
    const MeasurementOutcome got = photon_subtraction(r, t, d);
    CHECK(got.probability == doctest::Approx(p).epsilon(1e-12));
    CHECK(max_abs(got.density().matrix - rho / p) < 1e-12);
  }
  SUBCASE("weak taps approach a b |TMSS>") {
    // a (x) b sum lambda^n |n,n> = sum n lambda^n |n-1,n-1>
    const double lambda = std::tanh(r);
    Vector target = Vector::Zero(d * d);
    for (int n = 1; n < d; ++n) target((n - 1) * d + n - 1) = n * std::pow(lambda, n);
    target.normalize();
    const DensityOperator ideal = DensityOperator::from_pure(PureState(FockDims::uniform(2, d), target));
    double last = 0.0;
    for (double t : {0.9, 0.99, 0.999}) {
      const double f = fidelity(prepare_photon_subtracted(r, t, d), ideal);
      CHECK(f > last);
      CHECK(f > 1.0 - 3.0 * (1.0 - t));
      last = f;
    }
  }
  CHECK_THROWS_AS(photon_subtraction(0.0, 0.9, 4), ParameterError);
  CHECK_THROWS_AS(photon_subtraction(0.3, 1.0, 4), ParameterError);
}
