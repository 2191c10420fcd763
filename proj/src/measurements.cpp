#include "gaussify/measurements.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "gaussify/error.hpp"

namespace gfy {

Effect Effect::diagonal(RealVector weights) { return Effect(Kind::Diagonal, std::move(weights), Vector()); }

Effect Effect::rank_one(Vector ket) { return Effect(Kind::RankOne, RealVector(), std::move(ket)); }

const RealVector& Effect::weights() const {
  if (kind_ != Kind::Diagonal) throw Error("effect is not diagonal");
  return weights_;
}

const Vector& Effect::ket() const {
  if (kind_ != Kind::RankOne) throw Error("effect is not rank one");
  return ket_;
}

Matrix Effect::matrix() const {
  if (kind_ == Kind::Diagonal) return weights_.cast<Complex>().asDiagonal();
  return ket_ * ket_.adjoint();
}

Matrix Effect::sqrt() const {
  if (kind_ == Kind::Diagonal) return weights_.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
  const double n = ket_.norm();
  if (n == 0.0) return Matrix::Zero(dim(), dim());
  return ket_ * ket_.adjoint() / n;
}

Effect vacuum_effect(int dim) {
  if (dim < 1) throw DimensionError("effect needs dim >= 1");
  RealVector w = RealVector::Zero(dim);
  w(0) = 1.0;
  return Effect::diagonal(std::move(w));
}

Effect no_click_effect(int dim, double eta) {
  if (dim < 1) throw DimensionError("effect needs dim >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("detector efficiency must lie in [0,1]");
  RealVector w(dim);
  double v = 1.0;
  for (int n = 0; n < dim; ++n) {
    w(n) = v;
    v *= (1.0 - eta);
  }
  return Effect::diagonal(std::move(w));
}

Effect click_effect(int dim, double eta) {
  RealVector w = no_click_effect(dim, eta).weights();
  return Effect::diagonal(RealVector::Ones(dim) - w);
}

Vector coherent_amplitudes(int dim, Complex alpha) {
  Vector v(dim);
  Complex term = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < dim; ++n) {
    v(n) = term;
    term *= alpha / std::sqrt(n + 1.0);
  }
  return v;
}

Effect coherent_projector(int dim, Complex alpha) {
  if (dim < 1) throw DimensionError("effect needs dim >= 1");
  if (std::norm(alpha) > dim / 4.0)
    throw ParameterError("coherent amplitude too large for the truncation (|alpha|^2 > dim/4)");
  return Effect::rank_one(coherent_amplitudes(dim, alpha));
}

Effect filter_operator(int dim, double x) {
  if (dim < 1) throw DimensionError("effect needs dim >= 1");
  if (!(x > 0.0)) throw ParameterError("filter radius must be positive");
  RealVector w(dim);
  const double z = x * x;
  for (int n = 0; n < dim; ++n) w(n) = boost::math::gamma_p(n + 1.0, z);
  return Effect::diagonal(std::move(w));
}

// ---------------------------------------------------------------------------

DetectorModel::DetectorModel(OnOff v) : variant_(v) {
  if (!(v.eta >= 0.0 && v.eta <= 1.0)) throw ParameterError("detector efficiency must lie in [0,1]");
}

DetectorModel::DetectorModel(HomodyneFilter v) : variant_(v) {
  if (!(v.radius > 0.0)) throw ParameterError("filter radius must be positive");
}

namespace {

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParameterError("cannot parse " + what + " from '" + text + "'");
  }
  if (used != text.size()) throw ParameterError("cannot parse " + what + " from '" + text + "'");
  return v;
}

}  // namespace

DetectorModel DetectorModel::parse(const std::string& text) {
  if (text == "vacuum" || text == "ideal") return ideal();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    if (head == "onoff") return on_off(parse_number(value, "detector efficiency"));
    if (head == "homodyne") return homodyne(parse_number(value, "filter radius"));
  }
  throw ParameterError("unknown detector '" + text + "' (expected vacuum | onoff:<eta> | homodyne:<x>)");
}

Effect DetectorModel::success_effect(int dim) const {
  return std::visit(
      [dim](const auto& v) -> Effect {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IdealVacuum>) return vacuum_effect(dim);
        else if constexpr (std::is_same_v<T, OnOff>) return no_click_effect(dim, v.eta);
        else return filter_operator(dim, v.radius);
      },
      variant_);
}

std::string DetectorModel::to_string() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        std::ostringstream os;
        os.precision(12);
        if constexpr (std::is_same_v<T, IdealVacuum>) os << "vacuum";
        else if constexpr (std::is_same_v<T, OnOff>) os << "onoff:" << v.eta;
        else os << "homodyne:" << v.radius;
        return os.str();
      },
      variant_);
}

// ---------------------------------------------------------------------------

DensityOperator MeasurementOutcome::density() const {
  if (const auto* psi = std::get_if<PureState>(&state)) return DensityOperator::from_pure(*psi);
  return std::get<DensityOperator>(state);
}

namespace {

void check_mode(const FockDims& dims, const Effect& effect, int mode) {
  if (mode < 0 || mode >= dims.modes()) throw DimensionError("measured mode out of range");
  if (dims.modes() < 2) throw DimensionError("conditioning needs at least one unmeasured mode");
  if (effect.dim() != dims[mode]) throw DimensionError("effect dimension does not match the measured mode");
}

std::vector<int> other_modes(const FockDims& dims, int mode) {
  std::vector<int> keep;
  for (int m = 0; m < dims.modes(); ++m)
    if (m != mode) keep.push_back(m);
  return keep;
}

}  // namespace

double outcome_probability(const DensityOperator& rho, const Effect& effect, int mode) {
  check_mode(rho.dims, effect, mode);
  const int m[] = {mode};
  const DensityOperator local = partial_trace(rho, m);
  return (effect.matrix() * local.matrix).trace().real();
}

MeasurementOutcome condition_on(const DensityOperator& rho, const Effect& effect, int mode) {
  check_mode(rho.dims, effect, mode);
  const int target[] = {mode};
  const Matrix root = effect.sqrt();
  // sqrt(E) rho sqrt(E) with sqrt(E) Hermitian.
  const Matrix left = apply_on_modes(rho.dims, rho.matrix, root, target);
  const Matrix both = apply_on_modes(rho.dims, Matrix(left.adjoint()), root, target).adjoint();
  DensityOperator post(rho.dims, both);
  const auto keep = other_modes(rho.dims, mode);
  DensityOperator reduced = partial_trace(post, keep);
  const double p = reduced.trace();
  if (!(p >= kProbabilityFloor)) throw RareOutcomeError(p);
  reduced.matrix /= p;
  return MeasurementOutcome{std::move(reduced), p, 0.0};
}

MeasurementOutcome condition_on(const PureState& psi, const Effect& effect, int mode) {
  if (effect.kind() != Effect::Kind::RankOne) return condition_on(DensityOperator::from_pure(psi), effect, mode);
  check_mode(psi.dims, effect, mode);
  // (<phi| on mode) |psi>
  const auto keep = other_modes(psi.dims, mode);
  const FockDims rest = psi.dims.select(keep);
  Vector out = Vector::Zero(rest.total());
  const Vector& phi = effect.ket();
  for (Eigen::Index f = 0; f < psi.dims.total(); ++f) {
    const auto levels = psi.dims.multi(f);
    std::vector<int> rest_levels;
    rest_levels.reserve(keep.size());
    for (int m : keep) rest_levels.push_back(levels[static_cast<std::size_t>(m)]);
    out(rest.flat(rest_levels)) += std::conj(phi(levels[static_cast<std::size_t>(mode)])) * psi.amplitudes(f);
  }
  const double p = out.squaredNorm();
  if (!(p >= kProbabilityFloor)) throw RareOutcomeError(p);
  out /= std::sqrt(p);
  return MeasurementOutcome{PureState(rest, std::move(out)), p, 0.0};
}

}  // namespace gfy
