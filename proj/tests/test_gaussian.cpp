#include <cmath>
#include <random>

#include "doctest.h"
#include "gaussify/error.hpp"
#include "gaussify/gaussian.hpp"
#include "gaussify/measurements.hpp"
#include "gaussify/protocol.hpp"
#include "oracles.hpp"

using namespace gfy;

namespace {

double max_abs(const RealMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("appendix S") {
  for (int extra : {0, 1, 3}) {
    const SymplecticMap s = appendix_S(extra);
    CHECK(s.symplectic_residual() < 1e-12);
    CHECK(max_abs(s.matrix * s.matrix.transpose() - RealMatrix::Identity(s.matrix.rows(), s.matrix.rows())) < 1e-15);
  }
  const SymplecticMap s = appendix_S(1);
  const GaussianState vac = GaussianState::vacuum(3);
  CHECK(max_abs(apply_symplectic(vac, s).gamma - vac.gamma) < 1e-15);

  // printed rows in (x3, p3, x2, p2) order, a = 1/sqrt2
  const double a = 1.0 / std::sqrt(2.0);
  RealMatrix printed(4, 4);
  printed << a, 0, 0, a,
             0, a, -a, 0,
             0, a, a, 0,
             -a, 0, 0, a;
  CHECK(max_abs(s.matrix.topLeftCorner(4, 4) - printed) == 0.0);
  CHECK(max_abs(s.matrix.bottomRightCorner(2, 2) - RealMatrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(s.matrix.topRightCorner(4, 2)) == 0.0);
}

TEST_CASE("vacuum conditioning") {
  const GaussianState v = vacuum_condition(GaussianState::vacuum(2), 1);
  CHECK(max_abs(v.gamma - RealMatrix::Identity(2, 2)) < 1e-15);

  for (double r : {0.1, 0.4, 1.0}) {
    const GaussianState t = vacuum_condition(two_mode_squeezed(r), 1);
    CHECK(max_abs(t.gamma - RealMatrix::Identity(2, 2)) < 1e-10);
  }

  RealMatrix bad = RealMatrix::Identity(4, 4);
  bad.block<2, 2>(0, 0) = -RealMatrix::Identity(2, 2);
  CHECK_THROWS_AS(vacuum_condition(GaussianState(bad, RealVector::Zero(4)), 0), CovarianceError);
}

TEST_CASE("vacuum conditioning agrees with Fock-space conditioning") {
  std::mt19937 rng(21);
  const int d = 14;
  for (int trial = 0; trial < 4; ++trial) {
    const GaussianState gs = oracle::random_gaussian(rng, 2, 0.25, 0.05, 0.3);
    REQUIRE(gs.is_valid());
    const GaussianState predicted = vacuum_condition(gs, 1);
    const DensityOperator fock = gaussian_to_fock(gs, FockDims{d, d});
    const DensityOperator cond = condition_on(fock, vacuum_effect(d), 1).density();
    const GaussianState measured = covariance_of_state(cond);
    CHECK(max_abs(measured.gamma - predicted.gamma) < 1e-4);
    CHECK((measured.displacement - predicted.displacement).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("validity and purity are preserved") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianState mixed = oracle::random_gaussian(rng, 3, 0.8, 0.5, 1.0);
    CHECK(vacuum_condition(mixed, trial % 3).is_valid());
    const int pair[] = {0, 2};
    CHECK(apply_symplectic(mixed, embed(beamsplitter_symplectic(0.3), pair, 3)).is_valid());

    const GaussianState pure = oracle::random_gaussian(rng, 3, 0.8, 0.0, 1.0);
    CHECK(pure.gamma.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(vacuum_condition(pure, trial % 3).gamma.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("apply_symplectic") {
  std::mt19937 rng(4);
  const GaussianState gs = oracle::random_gaussian(rng, 2, 0.5, 0.3, 0.5);
  const SymplecticMap id{RealMatrix::Identity(4, 4)};
  CHECK(max_abs(apply_symplectic(gs, id).gamma - gs.gamma) == 0.0);
  const SymplecticMap a = beamsplitter_symplectic(0.3);
  const int first[] = {0};
  const SymplecticMap b = embed(squeezer_symplectic(0.2), first, 2);
  const GaussianState twice = apply_symplectic(apply_symplectic(gs, a), b);
  const GaussianState once = apply_symplectic(gs, SymplecticMap{b.matrix * a.matrix});
  CHECK(max_abs(twice.gamma - once.gamma) < 1e-14);
  CHECK(a.is_symplectic());
  CHECK(b.is_symplectic());
  CHECK_THROWS_AS(apply_symplectic(gs, appendix_S(1)), DimensionError);
}

TEST_CASE("eight-port construction equals vacuum conditioning up to displacement") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int modes = 2 + trial % 2;
    const GaussianState gs = oracle::random_gaussian(rng, modes, 0.9, 0.6, 1.5);
    const int mode = trial % modes;
    const GaussianState direct = vacuum_condition(gs, mode);
    const GaussianState eight = eight_port_condition(gs, mode, 0.3, -0.7);
    CHECK(max_abs(eight.gamma - direct.gamma) < 1e-10);
    const GaussianState centred = eight_port_condition(gs, mode, 0.0, 0.0);
    CHECK((centred.displacement - direct.displacement).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("two-mode squeezed state") {
  CHECK(max_abs(two_mode_squeezed(0.0).gamma - RealMatrix::Identity(4, 4)) == 0.0);
  for (double r : {0.2, 0.4, 0.9}) CHECK(two_mode_squeezed(r).gamma.determinant() == doctest::Approx(1.0).epsilon(1e-10));
  const GaussianState from_fock = covariance_of_state(DensityOperator::from_pure(two_mode_squeezed_vacuum(0.4, 14)));
  CHECK(max_abs(from_fock.gamma - two_mode_squeezed(0.4).gamma) < 1e-4);
  CHECK(from_fock.displacement.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance of Fock states") {
  const DensityOperator vac = DensityOperator::from_pure(PureState::basis(FockDims{6}, {0}));
  const GaussianState v = covariance_of_state(vac);
  CHECK(max_abs(v.gamma - RealMatrix::Identity(2, 2)) < 1e-15);
  CHECK(v.displacement.norm() < 1e-15);

  const DensityOperator one = DensityOperator::from_pure(PureState::basis(FockDims{6}, {1}));
  CHECK(max_abs(covariance_of_state(one).gamma - 3.0 * RealMatrix::Identity(2, 2)) < 1e-14);

  const Complex alpha(0.8, -0.5);
  const DensityOperator coh = DensityOperator::from_pure(PureState(FockDims{40}, coherent_amplitudes(40, alpha)));
  const GaussianState c = covariance_of_state(coh);
  CHECK(max_abs(c.gamma - RealMatrix::Identity(2, 2)) < 1e-10);
  CHECK(c.displacement(0) == doctest::Approx(std::sqrt(2.0) * alpha.real()).epsilon(1e-10));
  CHECK(c.displacement(1) == doctest::Approx(std::sqrt(2.0) * alpha.imag()).epsilon(1e-10));
}

TEST_CASE("gaussian_to_fock") {
  const Complex alpha(0.6, 0.3);
  const DensityOperator coh = gaussian_to_fock(GaussianState::coherent(alpha), FockDims{10});
  const Vector amp = coherent_amplitudes(10, alpha);
  CHECK((coh.matrix - amp * amp.adjoint()).cwiseAbs().maxCoeff() < 1e-13);

  const DensityOperator th = gaussian_to_fock(GaussianState::thermal(0.7), FockDims{10});
  for (int n = 0; n < 10; ++n)
    CHECK(th.matrix(n, n).real() == doctest::Approx(std::pow(0.7, n) / std::pow(1.7, n + 1)).epsilon(1e-12));

  const DensityOperator tm = gaussian_to_fock(two_mode_squeezed(0.4), FockDims{8, 8});
  const Vector psi = two_mode_squeezed_vacuum(0.4, 40).amplitudes;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(std::abs(tm.matrix(i * 8 + i, j * 8 + j) - psi(i * 40 + i) * std::conj(psi(j * 40 + j))) < 1e-12);
}

TEST_CASE("splitter symplectic matches the Fock splitter") {
  const int d = 24;
  const Complex a(0.5, 0.2), b(-0.3, 0.4);
  const PureState in = tensor(PureState(FockDims{d}, coherent_amplitudes(d, a)), PureState(FockDims{d}, coherent_amplitudes(d, b)));
  const int both[] = {0, 1};
  const GaussianState out = covariance_of_state(DensityOperator::from_pure(apply_unitary(in, beamsplitter_unitary(d), both)));
  const GaussianState predicted = apply_symplectic(direct_sum(GaussianState::coherent(a), GaussianState::coherent(b)), beamsplitter_symplectic());
  CHECK((out.displacement - predicted.displacement).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(max_abs(out.gamma - predicted.gamma) < 1e-8);
}

TEST_CASE("covariance prediction of a protocol step") {
  // identical Gaussian copies are a fixed point of the covariance
  for (double r : {0.1, 0.4}) {
    const GaussianState s = gaussian_step(two_mode_squeezed(r));
    CHECK(max_abs(s.gamma - two_mode_squeezed(r).gamma) < 1e-12);
  }
  std::mt19937 rng(17);
  const GaussianState gs = oracle::random_gaussian(rng, 2, 0.3, 0.1, 0.3);
  const GaussianState step = gaussian_step(gs);
  CHECK(max_abs(step.gamma - gs.gamma) < 1e-12);
  CHECK((step.displacement - std::sqrt(2.0) * gs.displacement).cwiseAbs().maxCoeff() < 1e-12);

  // Fock pipeline on truncated Gaussian inputs
  const int d = 12;
  for (double r : {0.2, 0.4}) {
    const DensityOperator fock = DensityOperator::from_pure(two_mode_squeezed_vacuum(r, d));
    const GaussianState measured = covariance_of_state(one_step(fock, DetectorModel::ideal()).density());
    CHECK(max_abs(measured.gamma - gaussian_step(two_mode_squeezed(r)).gamma) < 1e-3);
  }
  const GaussianState small = oracle::random_gaussian(rng, 2, 0.2, 0.03, 0.15);
  const DensityOperator fock = gaussian_to_fock(small, FockDims{d, d});
  const GaussianState measured = covariance_of_state(one_step(fock, DetectorModel::ideal()).density());
  const GaussianState predicted = gaussian_step(small);
  CHECK(max_abs(measured.gamma - predicted.gamma) < 1e-3);
  CHECK((measured.displacement - predicted.displacement).cwiseAbs().maxCoeff() < 1e-3);
}
