#pragma once

#include <functional>
#include <optional>
#include <string>

#include "fklab/lattice.hpp"

namespace fklab {

struct KernelQuadrature;  // harmonic.hpp
class WorkerPool;

/// 1-periodic, even interatomic potential with W(Z) = 0. The shipped
/// instance is W(a) = amplitude * (1 - cos(2 pi a)).
struct PeriodicPotential {
  double amplitude = 0.0;

  double value(double a) const;
  double derivative(double a) const;

  // Analytic sup norms of W, W', W'', W'''.
  double sup_value = 0.0;
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double sup_d3 = 0.0;
};

PeriodicPotential cosine_potential(double amplitude);

/// Boundary forcing F with certified bounds on F, F', F''. The bounds drive
/// the stable time step and the barrier constants, so they are supplied
/// analytically with each instance rather than estimated.
struct Nonlinearity {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double sup_f = 0.0;
  double sup_df = 0.0;
  double sup_ddf = 0.0;
  std::string label;

  double operator()(double a) const { return f(a); }
};

/// F(a) = sigma - W'(2a + eps*sigma); eps = 0 gives the limit nonlinearity.
Nonlinearity effective_nonlinearity(const PeriodicPotential& w, double sigma, double eps);
Nonlinearity constant_nonlinearity(double value);
Nonlinearity zero_nonlinearity();
/// F(u) = -sin(2 pi u) / (2 pi); the pinning force used by the scalar
/// boundary-reduction scenarios.
Nonlinearity sine_nonlinearity();

enum class DislocationKind { Screw, Edge };

/// Boundary data u_0 on the plane x_n = 0: either a constant or an arctan
/// transition layer along one lateral axis, constant along the others.
/// Far-field limits and analytic derivative bounds travel with the profile.
class BoundaryProfile {
 public:
  enum class Kind { Constant, Arctan };

  static BoundaryProfile constant(double value);
  /// offset + amplitude * (1/2 + (1/pi) atan(s / width)) along the given
  /// lateral axis (0-based).
  static BoundaryProfile arctan(double amplitude, double width, int axis = 0, double offset = 0.0);

  /// Value at a boundary point given its n-1 lateral coordinates.
  double eval(std::span<const double> zprime) const;
  /// Value as a function of the profile-axis coordinate alone.
  double eval_axis(double s) const;

  Kind kind() const noexcept { return kind_; }
  int axis() const noexcept { return axis_; }
  double width() const noexcept { return width_; }
  double limit_minus() const noexcept { return limit_minus_; }
  double limit_plus() const noexcept { return limit_plus_; }
  double sup_value() const noexcept { return sup_value_; }
  double sup_d1() const noexcept { return sup_d1_; }
  double sup_d2() const noexcept { return sup_d2_; }
  double sup_d3() const noexcept { return sup_d3_; }

  /// Bound on |u_0(s') - limit| for |s'| >= s; feeds the quadrature
  /// tail-error estimate.
  double far_deviation(double s) const;

  /// New profile shifted by a constant (limits shift along).
  BoundaryProfile shifted(double delta) const;

 private:
  Kind kind_ = Kind::Constant;
  int axis_ = 0;
  double amplitude_ = 0.0;
  double width_ = 1.0;
  double offset_ = 0.0;
  double limit_minus_ = 0.0, limit_plus_ = 0.0;
  double sup_value_ = 0.0, sup_d1_ = 0.0, sup_d2_ = 0.0, sup_d3_ = 0.0;
};

/// Screw profiles vary along lateral axis 0; edge profiles along lateral
/// axis 1 and require n >= 3. Both run from 0 to 1/2.
BoundaryProfile dislocation_profile(DislocationKind kind, double width, int n);

/// Initial data for the lattice system: a full field for beta > 0 (bulk
/// filled with the continuous harmonic extension), a boundary field for
/// beta = 0.
struct InitialData {
  std::optional<LatticeField> full;
  std::optional<BoundaryField> boundary;
};

InitialData extend_initial_data(const BoundaryProfile& p, const DomainPtr& dom, double beta,
                                const KernelQuadrature& q, WorkerPool* pool = nullptr);

/// Samples u_0 at the boundary-plane sites.
BoundaryField sample_boundary(const BoundaryProfile& p, const DomainPtr& dom);

}  // namespace fklab
