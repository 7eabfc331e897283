#pragma once

#include <functional>
#include <vector>

#include "fklab/lattice.hpp"
#include "fklab/physics.hpp"

namespace fklab {

class WorkerPool;

/// Half-space Poisson kernel H(z', z_n) = 2 z_n / (w_n (z_n^2 + |z'|^2)^(n/2))
/// where w_n is the measure of the unit (n-1)-sphere in R^n. Requires z_n > 0
/// and n >= 2.
double poisson_kernel(std::span<const double> zprime, double zn, int n);

/// Discretization of the boundary integral: tensor midpoint panels on
/// [-radius, radius]^(n-1) plus an analytic tail built from the far-field
/// limits. One midpoint refinement supplies the error estimate and a
/// Richardson-improved value.
struct KernelQuadrature {
  double radius = 64.0;
  std::int64_t panels = 4096;  ///< per axis, >= 8
  bool tail_correction = true;
  bool richardson = true;
  double tol = 1e-8;  ///< estimates above this are flagged

  void validate(double max_eval_height) const;
};

struct ExtensionValue {
  double value = 0.0;
  double error_estimate = 0.0;
  bool flagged = false;
};

/// u_0^c(x) = integral of H(x'-z', x_n) u_0(z') dz' for x_n > 0.
/// For n = 1 the bounded harmonic extension of the single boundary value is
/// that constant. Profiles vary along one lateral axis only, so for n >= 3
/// the integral reduces exactly to the one along the profile axis.
ExtensionValue continuous_extension(const BoundaryProfile& u0, std::span<const double> x, int n,
                                    const KernelQuadrature& q);

/// Quadrature of the bare kernel over the boundary (exact value 1); the
/// normalization check. Runs the full tensor rule for n = 3.
ExtensionValue poisson_kernel_mass(int n, std::span<const double> xprime, double xn,
                                   const KernelQuadrature& q);

/// Samples u_0^c on every site of the domain: u_0 itself on the boundary
/// plane, kernel quadrature above it.
LatticeField sample_continuous_extension(const BoundaryProfile& u0, const DomainPtr& dom,
                                         const KernelQuadrature& q, WorkerPool* pool = nullptr);

enum class TruncationClosure { DirichletFromKernel, ZeroNormalDifference };

/// Iterative solver for the discrete Laplace equation.
struct EllipticOptions {
  enum class Method {
    ConvexSweeps,  ///< red-black Gauss-Seidel; every update is a neighbor average
    RedBlackSor,   ///< over-relaxed sweeps; faster, gives up exact convexity
  };
  Method method = Method::ConvexSweeps;
  double omega = 0.0;  ///< 0 = choose from the grid dimensions (SOR only)
  std::int64_t max_sweeps = 4'000'000;
  std::int64_t residual_check_every = 8;
};

struct SolveStats {
  std::int64_t sweeps = 0;
  double residual = 0.0;
};

/// Solves Delta^eps u = 0 in place on the unknown sites (every site with
/// i_n >= 1 that is not Dirichlet data). With reflect_faces the truncation
/// faces are unknowns and missing stencil neighbors are dropped
/// (zero-normal-difference); otherwise face values are Dirichlet data.
/// Stops when the sup of |Delta^eps u| over the unknowns is <= tol.
SolveStats solve_laplace(LatticeField& u, bool reflect_faces, double tol,
                         const EllipticOptions& opts = {}, WorkerPool* pool = nullptr);

/// Sup of |Delta^eps u| over the unknown sites of the closure.
double laplace_residual(const LatticeField& u, bool reflect_faces);

/// Discrete harmonic extension of boundary data. face_values supplies
/// Dirichlet data on the truncation faces for DirichletFromKernel (maps a
/// physical point to a value); it is ignored for ZeroNormalDifference.
LatticeField discrete_extension(const BoundaryField& g, TruncationClosure closure, double tol,
                                const std::function<double(std::span<const double>)>& face_values = {},
                                const EllipticOptions& opts = {}, WorkerPool* pool = nullptr);

/// Measured decay of the harmonic extension: per sample height, the sup over
/// lateral samples of |Du_0^c| (1+x_n), |D^2 u_0^c| (1+x_n^2) from centered
/// differences, and of the lattice operators |D^eps|, |Delta^eps| applied to
/// kernel samples, weighted the same way.
struct ExtensionReportRow {
  double height = 0.0;
  double grad_product = 0.0;
  double hess_product = 0.0;
  double d_eps_product = 0.0;
  double lap_eps_product = 0.0;
};

struct ExtensionReport {
  std::vector<ExtensionReportRow> rows;
  double fitted_grad = 0.0;
  double fitted_hess = 0.0;
  double fitted_d_eps = 0.0;
  double fitted_lap_eps = 0.0;
  bool growth_flag = false;  ///< some product grows past 10% above its earlier max
};

ExtensionReport decay_report(const BoundaryProfile& u0, std::span<const double> heights,
                             const KernelQuadrature& q, double eps = 0.5, int n = 2);

}  // namespace fklab
