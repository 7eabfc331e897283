#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fklab/harmonic.hpp"
#include "fklab/physics.hpp"

namespace fklab {

/// Everything needed to set up and evolve one lattice system.
struct Scenario {
  int n = 2;
  double eps = 0.2;
  std::int64_t lateral_halfwidth = 0;
  std::int64_t height = 1;
  double beta = 0.0;
  Nonlinearity forcing;
  BoundaryProfile profile = BoundaryProfile::constant(0.0);
  TruncationClosure closure = TruncationClosure::DirichletFromKernel;
  std::int64_t closure_refresh_every = 0;  ///< 0 keeps truncation faces frozen
  bool resolve_bulk_first = false;  ///< beta=0 only: re-solve before the boundary update
  double safety = 0.9;
  double elliptic_tol = 1e-10;
  KernelQuadrature quadrature;
  EllipticOptions elliptic{EllipticOptions::Method::RedBlackSor, 0.0, 4'000'000, 8};

  DomainPtr make_domain() const { return make_domain_ptr(n, eps, lateral_halfwidth, height); }
};

/// Largest explicit step keeping every update a positive-coefficient
/// combination: beta eps^2/(2n) in the bulk and 1/((2n-1)/eps + sup|F'|) on
/// the boundary, scaled by the safety factor.
double stable_timestep(const LatticeDomain& dom, double beta, const Nonlinearity& f,
                       double safety);

struct ResidualSummary {
  double bulk = 0.0;
  double boundary = 0.0;
};

namespace detail {
struct DynPlan;
}

/// Evolving state: the full field (for beta = 0 the bulk part is the current
/// elliptic solve), the previous step for residuals, and the step bookkeeping.
class SimState {
 public:
  SimState(Scenario sc, WorkerPool* pool = nullptr, const LatticeField* u0c = nullptr);

  const Scenario& scenario() const { return sc_; }
  const LatticeField& field() const { return field_; }
  const LatticeField& previous() const { return prev_; }
  double time() const { return field_.time(); }
  double dt_last() const { return dt_last_; }
  std::int64_t steps() const { return steps_; }

  /// One forward-Euler step of the coupled system (beta > 0).
  void step_beta_positive(double dt);
  /// Boundary update then bulk re-solve (beta = 0).
  void step_beta_zero(double dt);
  /// Dispatches on beta.
  void advance(double dt);

  /// Re-solves the bulk from the current trace (beta = 0); returns the solve
  /// stats. The state invariant keeps the residual at or below elliptic_tol.
  SolveStats resolve_bulk();

  double last_bulk_residual() const { return bulk_residual_; }

 private:
  void apply_closure_refresh();
  void check_finite(const char* where) const;

  Scenario sc_;
  WorkerPool* pool_;
  LatticeField field_;
  LatticeField prev_;
  LatticeField scratch_;
  std::shared_ptr<const detail::DynPlan> plan_;
  double dt_last_ = 0.0;
  std::int64_t steps_ = 0;
  double bulk_residual_ = 0.0;
};

/// Quasi-static bulk solve for an evolving trace; same contract as
/// discrete_extension but warm-started from a previous bulk field.
LatticeField elliptic_solve(const BoundaryField& trace, TruncationClosure closure, double tol,
                            const std::function<double(std::span<const double>)>& face_values = {},
                            const LatticeField* warm_start = nullptr,
                            const EllipticOptions& opts = {}, WorkerPool* pool = nullptr);

/// Equation residuals of the latest step: sup over the bulk of
/// |beta du/dt - Delta^eps u| (for beta = 0, sup |Delta^eps u|) and sup over
/// the boundary of |du/dt - F(u) - D^eps u|, with du/dt the one-step
/// difference. Zero before the first step.
ResidualSummary residual_report(const SimState& s);

struct Snapshot {
  double time = 0.0;
  LatticeField field;
  ResidualSummary residual;
  std::int64_t step_index = 0;
};

struct Trajectory {
  Scenario scenario;
  std::vector<Snapshot> snapshots;
  std::int64_t total_steps = 0;
  double dt_nominal = 0.0;
  double horizon = 0.0;
  double wall_ms = 0.0;
};

/// Runs the system on [0, T], recording the initial state and every requested
/// snapshot time (steps shrink to land on them exactly). A precomputed field
/// of kernel-extension samples can be passed to avoid re-sampling.
Trajectory simulate(const Scenario& sc, double T, std::vector<double> snapshot_times,
                    WorkerPool* pool = nullptr, const LatticeField* u0c = nullptr);

/// Explicit super/sub-solutions u_0^c +- C (sqrt(1+x_n) - 1 + t) with the
/// constant taken from measured operator bounds on the kernel extension, the
/// flat bound sup|u_0| + t sup|F|, the beta > 0 bound u_0 +- t C_beta, and
/// for beta = 0 the discrete-extension pair u_0^D +- t C_eps.
struct BarrierPair {
  LatticeField u0c;  ///< boundary data on the plane, kernel samples above
  double C = 0.0;
  double sup_u0 = 0.0;
  double sup_F = 0.0;
  double beta = 0.0;
  double C_beta = 0.0;                     ///< beta > 0 only
  std::optional<LatticeField> u0_discrete;  ///< beta = 0 alternative barrier
  double C_eps = 0.0;

  double upper(double u0c_site, double xn, double t) const;
  double lower(double u0c_site, double xn, double t) const;
  double flat_bound(double t) const { return sup_u0 + t * sup_F; }
};

BarrierPair make_barriers(const Scenario& sc, const LatticeField& u0c,
                          const LatticeField* u0_discrete = nullptr);

struct BarrierViolationRow {
  double time = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  double flat = 0.0;
  double beta_bound = 0.0;  ///< beta > 0 runs
  double alt = 0.0;         ///< beta = 0 runs
};

struct BarrierViolations {
  std::vector<BarrierViolationRow> rows;
  BarrierViolationRow max;  ///< time field holds the horizon
};

/// Max positive violation of each bound per snapshot; all zeros when the
/// trajectory stays inside the barriers.
BarrierViolations barrier_audit(const Trajectory& traj, const BarrierPair& b);

/// Max over snapshots and sites of (a - b)^+ for trajectories with ordered
/// initial data; the monotone update keeps it at rounding level.
double ordering_audit(const Trajectory& a, const Trajectory& b);

}  // namespace fklab
