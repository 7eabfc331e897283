#include "fklab/physics.hpp"

#include <cmath>

#include "fklab/harmonic.hpp"

namespace fklab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double PeriodicPotential::value(double a) const { return amplitude * (1.0 - std::cos(kTwoPi * a)); }

double PeriodicPotential::derivative(double a) const {
  return amplitude * kTwoPi * std::sin(kTwoPi * a);
}

PeriodicPotential cosine_potential(double amplitude) {
  if (!(amplitude > 0.0)) throw std::invalid_argument("potential amplitude must be positive");
  PeriodicPotential w;
  w.amplitude = amplitude;
  w.sup_value = 2.0 * amplitude;
  w.sup_d1 = kTwoPi * amplitude;
  w.sup_d2 = kTwoPi * kTwoPi * amplitude;
  w.sup_d3 = kTwoPi * kTwoPi * kTwoPi * amplitude;
  return w;
}

Nonlinearity effective_nonlinearity(const PeriodicPotential& w, double sigma, double eps) {
  Nonlinearity F;
  F.f = [w, sigma, eps](double a) { return sigma - w.derivative(2.0 * a + eps * sigma); };
  F.df = [w, sigma, eps](double a) {
    const double s = 2.0 * a + eps * sigma;
    return -2.0 * w.amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * s);
  };
  F.sup_f = std::abs(sigma) + w.sup_d1;
  F.sup_df = 2.0 * w.sup_d2;
  F.sup_ddf = 4.0 * w.sup_d3;
  F.label = "effective";
  return F;
}

Nonlinearity constant_nonlinearity(double value) {
  Nonlinearity F;
  F.f = [value](double) { return value; };
  F.df = [](double) { return 0.0; };
  F.sup_f = std::abs(value);
  F.label = "constant";
  return F;
}

Nonlinearity zero_nonlinearity() {
  Nonlinearity F = constant_nonlinearity(0.0);
  F.label = "zero";
  return F;
}

Nonlinearity sine_nonlinearity() {
  Nonlinearity F;
  F.f = [](double u) { return -std::sin(kTwoPi * u) / kTwoPi; };
  F.df = [](double u) { return -std::cos(kTwoPi * u); };
  F.sup_f = 1.0 / kTwoPi;
  F.sup_df = 1.0;
  F.sup_ddf = kTwoPi;
  F.label = "sine";
  return F;
}

BoundaryProfile BoundaryProfile::constant(double value) {
  BoundaryProfile p;
  p.kind_ = Kind::Constant;
  p.offset_ = value;
  p.limit_minus_ = value;
  p.limit_plus_ = value;
  p.sup_value_ = std::abs(value);
  return p;
}

BoundaryProfile BoundaryProfile::arctan(double amplitude, double width, int axis, double offset) {
  if (!(width > 0.0)) throw std::invalid_argument("profile width must be positive");
  if (axis < 0) throw std::invalid_argument("profile axis must be nonnegative");
  BoundaryProfile p;
  p.kind_ = Kind::Arctan;
  p.axis_ = axis;
  p.amplitude_ = amplitude;
  p.width_ = width;
  p.offset_ = offset;
  p.limit_minus_ = offset;
  p.limit_plus_ = offset + amplitude;
  p.sup_value_ = std::max(std::abs(p.limit_minus_), std::abs(p.limit_plus_));
  const double a = std::abs(amplitude);
  p.sup_d1_ = a / (kPi * width);
  // sup |phi'| = 18/(16 sqrt(3)) and sup |phi''| = 2 for phi(t) = 1/(1+t^2).
  p.sup_d2_ = a * (18.0 / (16.0 * std::sqrt(3.0))) / (kPi * width * width);
  p.sup_d3_ = a * 2.0 / (kPi * width * width * width);
  return p;
}

double BoundaryProfile::eval_axis(double s) const {
  if (kind_ == Kind::Constant) return offset_;
  return offset_ + amplitude_ * (0.5 + std::atan(s / width_) / kPi);
}

double BoundaryProfile::eval(std::span<const double> zprime) const {
  if (kind_ == Kind::Constant) return offset_;
  const double s = static_cast<std::size_t>(axis_) < zprime.size() ? zprime[axis_] : 0.0;
  return eval_axis(s);
}

double BoundaryProfile::far_deviation(double s) const {
  if (kind_ == Kind::Constant) return 0.0;
  if (s <= 0.0) return std::abs(amplitude_);
  return std::abs(amplitude_) * (0.5 - std::atan(s / width_) / kPi);
}

BoundaryProfile BoundaryProfile::shifted(double delta) const {
  BoundaryProfile p = *this;
  p.offset_ += delta;
  p.limit_minus_ += delta;
  p.limit_plus_ += delta;
  p.sup_value_ = std::max(std::abs(p.limit_minus_), std::abs(p.limit_plus_));
  if (p.kind_ == Kind::Arctan) {
    // Interior values stay between the limits.
    p.sup_value_ = std::max({p.sup_value_, std::abs(p.offset_), std::abs(p.offset_ + p.amplitude_)});
  }
  return p;
}

BoundaryProfile dislocation_profile(DislocationKind kind, double width, int n) {
  if (!(width > 0.0)) throw std::invalid_argument("dislocation width must be positive");
  if (kind == DislocationKind::Edge && n < 3) {
    throw std::invalid_argument("edge dislocations need n >= 3 (two lateral axes)");
  }
  if (n < 2) throw std::invalid_argument("dislocation profiles need n >= 2");
  const int axis = (kind == DislocationKind::Screw) ? 0 : 1;
  return BoundaryProfile::arctan(0.5, width, axis, 0.0);
}

BoundaryField sample_boundary(const BoundaryProfile& p, const DomainPtr& dom) {
  BoundaryField g(dom, 0.0);
  const std::int64_t count = dom->plane_size();
  const int n = dom->dim();
  std::array<double, kMaxDim> pos{};
  for (std::int64_t i = 0; i < count; ++i) {
    const Coord c = dom->coord(i);
    dom->position(c, std::span<double>(pos.data(), n));
    g[i] = p.eval(std::span<const double>(pos.data(), n - 1));
  }
  return g;
}

InitialData extend_initial_data(const BoundaryProfile& p, const DomainPtr& dom, double beta,
                                const KernelQuadrature& q, WorkerPool* pool) {
  InitialData init;
  if (beta > 0.0) {
    init.full = sample_continuous_extension(p, dom, q, pool);
  } else {
    init.boundary = sample_boundary(p, dom);
  }
  return init;
}

}  // namespace fklab
