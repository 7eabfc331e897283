#include "fklab/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fklab/parallel.hpp"
#include "stencil_plan.hpp"

namespace fklab {

namespace detail {

struct DynPlan {
  LaplacePlan bulk;
  BoundaryPlan boundary;
  DynPlan(const LatticeDomain& dom, bool reflect) : bulk(dom, reflect), boundary(dom, reflect) {}
};

}  // namespace detail

using detail::DynPlan;

double stable_timestep(const LatticeDomain& dom, double beta, const Nonlinearity& f,
                       double safety) {
  if (!(safety > 0.0) || safety > 1.0) throw std::invalid_argument("safety must lie in (0, 1]");
  if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  const int n = dom.dim();
  const double eps = dom.eps();
  const double boundary_rate = static_cast<double>(2 * n - 1) / eps + f.sup_df;
  const double boundary_dt = 1.0 / boundary_rate;
  if (beta > 0.0) {
    const double bulk_dt = beta * eps * eps / static_cast<double>(2 * n);
    return safety * std::min(bulk_dt, boundary_dt);
  }
  return safety * boundary_dt;
}

namespace {

// Boundary forcing update into `out`, reading `in` everywhere (Jacobi-style
// full snapshot, so worker count cannot change results).
void boundary_update(const LatticeField& in, LatticeField& out, const DynPlan& plan,
                     const Nonlinearity& F, double eps, double dt) {
  const double* v = in.values().data();
  double* w = out.values().data();
  const auto& bp = plan.boundary;
  const double inv_eps = 1.0 / eps;
  for (std::int64_t i : bp.full) {
    double acc = 0.0;
    for (int k = 0; k < bp.n_lateral; ++k) acc += v[i + bp.lateral_strides[k]] - v[i];
    acc += v[i + bp.up_stride] - v[i];
    w[i] = v[i] + dt * (F(v[i]) + acc * inv_eps);
  }
  for (std::size_t j = 0; j < bp.partial.size(); ++j) {
    const std::int64_t i = bp.partial[j];
    double acc = 0.0;
    for (int k = 0; k < bp.n_lateral; ++k) {
      if (bp.partial_mask[j] & (1u << k)) acc += v[i + bp.lateral_strides[k]] - v[i];
    }
    acc += v[i + bp.up_stride] - v[i];
    w[i] = v[i] + dt * (F(v[i]) + acc * inv_eps);
  }
}

double d_eps_at(const LatticeField& f, const DynPlan& plan, std::int64_t i, std::uint8_t mask,
                bool full, double eps) {
  const double* v = f.values().data();
  const auto& bp = plan.boundary;
  double acc = 0.0;
  for (int k = 0; k < bp.n_lateral; ++k) {
    if (full || (mask & (1u << k))) acc += v[i + bp.lateral_strides[k]] - v[i];
  }
  acc += v[i + bp.up_stride] - v[i];
  return acc / eps;
}

}  // namespace

SimState::SimState(Scenario sc, WorkerPool* pool, const LatticeField* u0c)
    : sc_(std::move(sc)), pool_(pool) {
  const DomainPtr dom = sc_.make_domain();
  const bool reflect = sc_.closure == TruncationClosure::ZeroNormalDifference;
  plan_ = std::make_shared<const DynPlan>(*dom, reflect);

  if (sc_.beta > 0.0) {
    if (u0c && u0c->domain().same_geometry(*dom)) {
      field_ = *u0c;
      field_.set_time(0.0);
    } else {
      field_ = sample_continuous_extension(sc_.profile, dom, sc_.quadrature, pool_);
    }
  } else {
    const BoundaryField g = sample_boundary(sc_.profile, dom);
    std::function<double(std::span<const double>)> faces;
    if (!reflect) {
      if (u0c && u0c->domain().same_geometry(*dom)) {
        const LatticeField* src = u0c;
        faces = [src](std::span<const double> x) {
          Coord c{};
          const LatticeDomain& d = src->domain();
          for (int k = 0; k < d.dim(); ++k) c[k] = std::llround(x[k] / d.eps());
          return (*src)[d.offset(c)];
        };
      } else {
        const BoundaryProfile prof = sc_.profile;
        const KernelQuadrature quad = sc_.quadrature;
        const int n = sc_.n;
        faces = [prof, quad, n](std::span<const double> x) {
          return continuous_extension(prof, x, n, quad).value;
        };
      }
    }
    field_ = discrete_extension(g, sc_.closure, sc_.elliptic_tol, faces, sc_.elliptic, pool_);
    bulk_residual_ = laplace_residual(field_, reflect);
  }
  prev_ = field_;
  scratch_ = field_;
}

void SimState::check_finite(const char* where) const {
  if (!field_.all_finite()) {
    throw DivergenceError(std::string("non-finite field value after ") + where + " at step " +
                              std::to_string(steps_),
                          steps_);
  }
}

void SimState::step_beta_positive(double dt) {
  if (!(sc_.beta > 0.0)) throw std::invalid_argument("step_beta_positive needs beta > 0");
  prev_ = field_;
  scratch_ = field_;

  const double* v = field_.values().data();
  double* w = scratch_.values().data();
  const double eps = field_.domain().eps();
  const double coef = dt / (sc_.beta * eps * eps);
  const auto& bulk = plan_->bulk;
  const int nn = bulk.n_neighbors;

  auto bulk_full = [&](const std::vector<std::int64_t>& list, std::int64_t b, std::int64_t e) {
    for (std::int64_t j = b; j < e; ++j) {
      const std::int64_t i = list[j];
      double acc = 0.0;
      for (int k = 0; k < nn; ++k) acc += v[i + bulk.strides[k]] - v[i];
      w[i] = v[i] + coef * acc;
    }
  };
  for (int p = 0; p < 2; ++p) {
    const auto count = static_cast<std::int64_t>(bulk.full[p].size());
    if (pool_ && pool_->workers() > 1) {
      const auto& list = bulk.full[p];
      pool_->parallel_for(count, [&](std::int64_t b, std::int64_t e) { bulk_full(list, b, e); });
    } else {
      bulk_full(bulk.full[p], 0, count);
    }
    for (std::size_t j = 0; j < bulk.partial[p].size(); ++j) {
      const std::int64_t i = bulk.partial[p][j];
      double acc = 0.0;
      for (int k = 0; k < nn; ++k) {
        if (bulk.partial_mask[p][j] & (1u << k)) acc += v[i + bulk.strides[k]] - v[i];
      }
      w[i] = v[i] + coef * acc;
    }
  }

  boundary_update(field_, scratch_, *plan_, sc_.forcing, eps, dt);

  std::swap(field_, scratch_);
  field_.set_time(prev_.time() + dt);
  dt_last_ = dt;
  ++steps_;
  if (sc_.closure_refresh_every > 0 && steps_ % sc_.closure_refresh_every == 0) {
    apply_closure_refresh();
  }
  check_finite("bulk/boundary update");
}

SolveStats SimState::resolve_bulk() {
  const bool reflect = sc_.closure == TruncationClosure::ZeroNormalDifference;
  const SolveStats stats = solve_laplace(field_, reflect, sc_.elliptic_tol, sc_.elliptic, pool_);
  bulk_residual_ = stats.residual;
  return stats;
}

void SimState::step_beta_zero(double dt) {
  if (sc_.beta != 0.0) throw std::invalid_argument("step_beta_zero needs beta = 0");
  prev_ = field_;

  if (sc_.resolve_bulk_first) {
    resolve_bulk();
    scratch_ = field_;
    boundary_update(field_, scratch_, *plan_, sc_.forcing, field_.domain().eps(), dt);
    std::swap(field_, scratch_);
  } else {
    scratch_ = field_;
    boundary_update(field_, scratch_, *plan_, sc_.forcing, field_.domain().eps(), dt);
    std::swap(field_, scratch_);
    resolve_bulk();
  }

  field_.set_time(prev_.time() + dt);
  dt_last_ = dt;
  ++steps_;
  if (sc_.closure_refresh_every > 0 && steps_ % sc_.closure_refresh_every == 0) {
    apply_closure_refresh();
    resolve_bulk();
  }
  check_finite("boundary update / bulk solve");
}

void SimState::advance(double dt) {
  if (sc_.beta > 0.0) {
    step_beta_positive(dt);
  } else {
    step_beta_zero(dt);
  }
}

void SimState::apply_closure_refresh() {
  const LatticeDomain& dom = field_.domain();
  const int n = dom.dim();
  if (sc_.closure != TruncationClosure::DirichletFromKernel) return;
  if (n > 2) {
    throw std::invalid_argument("closure refresh is implemented for n <= 2");
  }
  // Re-extend the current trace to the truncation faces: midpoint panels at
  // the boundary sites plus tails weighted by the edge values of the trace.
  const double eps = dom.eps();
  const std::int64_t L = dom.lateral_halfwidth();
  const double extent = dom.lateral_extent();
  const double left_edge = field_[dom.offset(Coord{-L, 0, 0, 0})];
  const double right_edge = field_[dom.offset(Coord{L, 0, 0, 0})];
  constexpr double kPi = 3.14159265358979323846;

  for (std::int64_t i = dom.plane_size(); i < dom.site_count(); ++i) {
    const Coord c = dom.coord(i);
    if (dom.classify(c) != SiteClass::Face) continue;
    const double xa = n == 2 ? eps * static_cast<double>(c[0]) : 0.0;
    const double h = eps * static_cast<double>(c[n - 1]);
    double acc = 0.0;
    if (n == 2) {
      for (std::int64_t j = -L; j <= L; ++j) {
        const double z = eps * static_cast<double>(j);
        const double w = xa - z;
        acc += h / (kPi * (h * h + w * w)) * field_[dom.offset(Coord{j, 0, 0, 0})];
      }
      acc *= eps;
      const double half = extent + 0.5 * eps;
      acc += right_edge * (0.5 * kPi - std::atan((half - xa) / h)) / kPi;
      acc += left_edge * (0.5 * kPi - std::atan((half + xa) / h)) / kPi;
    } else {
      acc = field_[0];  // n = 1: constant extension of the single trace value
    }
    field_[i] = acc;
  }
}

LatticeField elliptic_solve(const BoundaryField& trace, TruncationClosure closure, double tol,
                            const std::function<double(std::span<const double>)>& face_values,
                            const LatticeField* warm_start, const EllipticOptions& opts,
                            WorkerPool* pool) {
  const DomainPtr dom = trace.domain_ptr();
  const bool reflect = closure == TruncationClosure::ZeroNormalDifference;
  if (!reflect && !face_values) {
    throw std::invalid_argument("DirichletFromKernel closure needs face values");
  }
  if (warm_start && warm_start->domain().same_geometry(*dom)) {
    LatticeField u = *warm_start;
    u.set_time(trace.time());
    for (std::int64_t i = 0; i < dom->plane_size(); ++i) u[i] = trace[i];
    if (!reflect) {
      std::array<double, kMaxDim> pos{};
      for (std::int64_t i = dom->plane_size(); i < dom->site_count(); ++i) {
        const Coord c = dom->coord(i);
        if (dom->classify(c) != SiteClass::Face) continue;
        dom->position(c, std::span<double>(pos.data(), dom->dim()));
        u[i] = face_values(std::span<const double>(pos.data(), dom->dim()));
      }
    }
    solve_laplace(u, reflect, tol, opts, pool);
    return u;
  }
  return discrete_extension(trace, closure, tol, face_values, opts, pool);
}

ResidualSummary residual_report(const SimState& s) {
  ResidualSummary r;
  if (s.steps() == 0) {
    if (s.scenario().beta == 0.0) r.bulk = s.last_bulk_residual();
    return r;
  }
  const LatticeField& u = s.field();
  const LatticeField& p = s.previous();
  const LatticeDomain& dom = u.domain();
  const double dt = s.dt_last();
  const double beta = s.scenario().beta;
  const bool reflect = s.scenario().closure == TruncationClosure::ZeroNormalDifference;
  const double eps = dom.eps();

  const detail::LaplacePlan bulk(dom, reflect);
  const double inv_eps2 = 1.0 / (eps * eps);
  for (int par = 0; par < 2; ++par) {
    for (std::int64_t i : bulk.full[par]) {
      double acc = 0.0;
      for (int k = 0; k < bulk.n_neighbors; ++k) acc += u[i + bulk.strides[k]] - u[i];
      const double lap = acc * inv_eps2;
      const double dudt = (u[i] - p[i]) / dt;
      r.bulk = std::max(r.bulk, std::abs(beta * dudt - lap));
    }
    for (std::size_t j = 0; j < bulk.partial[par].size(); ++j) {
      const std::int64_t i = bulk.partial[par][j];
      double acc = 0.0;
      for (int k = 0; k < bulk.n_neighbors; ++k) {
        if (bulk.partial_mask[par][j] & (1u << k)) acc += u[i + bulk.strides[k]] - u[i];
      }
      const double lap = acc * inv_eps2;
      const double dudt = (u[i] - p[i]) / dt;
      r.bulk = std::max(r.bulk, std::abs(beta * dudt - lap));
    }
  }

  const detail::BoundaryPlan bp(dom, reflect);
  const Nonlinearity& F = s.scenario().forcing;
  for (std::int64_t i : bp.full) {
    double acc = 0.0;
    for (int k = 0; k < bp.n_lateral; ++k) acc += u[i + bp.lateral_strides[k]] - u[i];
    acc += u[i + bp.up_stride] - u[i];
    const double dudt = (u[i] - p[i]) / dt;
    r.boundary = std::max(r.boundary, std::abs(dudt - F(u[i]) - acc / eps));
  }
  for (std::size_t j = 0; j < bp.partial.size(); ++j) {
    const std::int64_t i = bp.partial[j];
    double acc = 0.0;
    for (int k = 0; k < bp.n_lateral; ++k) {
      if (bp.partial_mask[j] & (1u << k)) acc += u[i + bp.lateral_strides[k]] - u[i];
    }
    acc += u[i + bp.up_stride] - u[i];
    const double dudt = (u[i] - p[i]) / dt;
    r.boundary = std::max(r.boundary, std::abs(dudt - F(u[i]) - acc / eps));
  }
  return r;
}

Trajectory simulate(const Scenario& sc, double T, std::vector<double> snapshot_times,
                    WorkerPool* pool, const LatticeField* u0c) {
  if (T < 0.0) throw std::invalid_argument("horizon must be >= 0");
  std::sort(snapshot_times.begin(), snapshot_times.end());
  for (double t : snapshot_times) {
    if (t < 0.0 || t > T + 1e-12) {
      throw std::invalid_argument("snapshot times must lie in [0, T]");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.scenario = sc;
  traj.horizon = T;

  SimState state(sc, pool, u0c);
  const DomainPtr dom = state.field().domain_ptr();
  traj.dt_nominal = stable_timestep(*dom, sc.beta, sc.forcing, sc.safety);

  auto record = [&](double t) {
    Snapshot snap;
    snap.time = t;
    snap.field = state.field();
    snap.residual = residual_report(state);
    snap.step_index = state.steps();
    traj.snapshots.push_back(std::move(snap));
  };

  record(0.0);
  std::size_t next_snap = 0;
  while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= 1e-12) ++next_snap;

  double t = 0.0;
  while (t < T - 1e-12) {
    double target = T;
    if (next_snap < snapshot_times.size()) target = std::min(target, snapshot_times[next_snap]);
    const double dt = std::min(traj.dt_nominal, target - t);
    state.advance(dt);
    t += dt;
    if (next_snap < snapshot_times.size() && t >= snapshot_times[next_snap] - 1e-12) {
      record(snapshot_times[next_snap]);
      ++next_snap;
    }
  }
  traj.total_steps = state.steps();
  traj.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

double BarrierPair::upper(double u0c_site, double xn, double t) const {
  return u0c_site + C * (std::sqrt(1.0 + xn) - 1.0 + t);
}

double BarrierPair::lower(double u0c_site, double xn, double t) const {
  return u0c_site - C * (std::sqrt(1.0 + xn) - 1.0 + t);
}

BarrierPair make_barriers(const Scenario& sc, const LatticeField& u0c,
                          const LatticeField* u0_discrete) {
  BarrierPair b;
  b.u0c = u0c;
  b.beta = sc.beta;
  b.sup_F = sc.forcing.sup_f;
  b.sup_u0 = u0c.sup_norm();

  const LatticeDomain& dom = u0c.domain();
  const double eps = dom.eps();
  const bool reflect = sc.closure == TruncationClosure::ZeroNormalDifference;
  const detail::DynPlan plan(dom, reflect);

  double sup_d = 0.0;
  for (std::int64_t i : plan.boundary.full) {
    sup_d = std::max(sup_d, std::abs(d_eps_at(u0c, plan, i, 0xff, true, eps)));
  }
  for (std::size_t j = 0; j < plan.boundary.partial.size(); ++j) {
    sup_d = std::max(sup_d, std::abs(d_eps_at(u0c, plan, plan.boundary.partial[j],
                                              plan.boundary.partial_mask[j], false, eps)));
  }

  double bulk_env = 0.0;
  double sup_lap = 0.0;
  const double inv_eps2 = 1.0 / (eps * eps);
  for (int p = 0; p < 2; ++p) {
    for (std::int64_t i : plan.bulk.full[p]) {
      double acc = 0.0;
      for (int k = 0; k < plan.bulk.n_neighbors; ++k) acc += u0c[i + plan.bulk.strides[k]] - u0c[i];
      const double lap = std::abs(acc) * inv_eps2;
      const double xn = eps * static_cast<double>(dom.coord(i)[dom.dim() - 1]);
      bulk_env = std::max(bulk_env, 4.0 * std::pow(1.0 + xn, 1.5) * lap);
      sup_lap = std::max(sup_lap, lap);
    }
  }

  // Smallest constant meeting the boundary constraint C >= supF + supD + C/2
  // and the bulk envelope, then doubled for audit headroom.
  const double c_min = std::max(2.0 * (b.sup_F + sup_d), bulk_env);
  b.C = 2.0 * c_min;

  if (sc.beta > 0.0) {
    b.C_beta = std::max(sup_lap / sc.beta, b.sup_F + sup_d);
  }
  if (sc.beta == 0.0 && u0_discrete) {
    b.u0_discrete = *u0_discrete;
    double sup_d_disc = 0.0;
    for (std::int64_t i : plan.boundary.full) {
      sup_d_disc = std::max(sup_d_disc, std::abs(d_eps_at(*u0_discrete, plan, i, 0xff, true, eps)));
    }
    for (std::size_t j = 0; j < plan.boundary.partial.size(); ++j) {
      sup_d_disc = std::max(sup_d_disc,
                            std::abs(d_eps_at(*u0_discrete, plan, plan.boundary.partial[j],
                                              plan.boundary.partial_mask[j], false, eps)));
    }
    b.C_eps = sup_d_disc + b.sup_F;
  }
  return b;
}

BarrierViolations barrier_audit(const Trajectory& traj, const BarrierPair& b) {
  BarrierViolations out;
  const LatticeDomain& dom = b.u0c.domain();
  const int n = dom.dim();
  const double eps = dom.eps();

  for (const Snapshot& snap : traj.snapshots) {
    BarrierViolationRow row;
    row.time = snap.time;
    const double t = snap.time;
    const double flat = b.flat_bound(t);
    for (std::int64_t i = 0; i < dom.site_count(); ++i) {
      const double xn = eps * static_cast<double>(dom.coord(i)[n - 1]);
      const double u = snap.field[i];
      row.upper = std::max(row.upper, u - b.upper(b.u0c[i], xn, t));
      row.lower = std::max(row.lower, b.lower(b.u0c[i], xn, t) - u);
      row.flat = std::max(row.flat, std::abs(u) - flat);
      if (b.beta > 0.0) {
        row.beta_bound = std::max(row.beta_bound, std::abs(u - b.u0c[i]) - t * b.C_beta);
      }
      if (b.beta == 0.0 && b.u0_discrete) {
        row.alt = std::max(row.alt, std::abs(u - (*b.u0_discrete)[i]) - t * b.C_eps);
      }
    }
    out.max.upper = std::max(out.max.upper, row.upper);
    out.max.lower = std::max(out.max.lower, row.lower);
    out.max.flat = std::max(out.max.flat, row.flat);
    out.max.beta_bound = std::max(out.max.beta_bound, row.beta_bound);
    out.max.alt = std::max(out.max.alt, row.alt);
    out.max.time = traj.horizon;
    out.rows.push_back(row);
  }
  return out;
}

double ordering_audit(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.empty() || b.snapshots.empty() ||
      a.snapshots.size() != b.snapshots.size()) {
    throw std::invalid_argument("ordering audit needs matching snapshot lists");
  }
  const LatticeDomain& da = a.snapshots.front().field.domain();
  if (!da.same_geometry(b.snapshots.front().field.domain())) {
    throw std::invalid_argument("ordering audit needs a common lattice");
  }
  if (std::abs(a.dt_nominal - b.dt_nominal) > 1e-15) {
    throw std::invalid_argument("ordering audit needs a common time step");
  }
  const LatticeField& a0 = a.snapshots.front().field;
  const LatticeField& b0 = b.snapshots.front().field;
  for (std::int64_t i = 0; i < da.site_count(); ++i) {
    if (a0[i] > b0[i]) {
      throw std::invalid_argument("ordering audit requires ordered initial data (a <= b)");
    }
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    const LatticeField& fa = a.snapshots[s].field;
    const LatticeField& fb = b.snapshots[s].field;
    for (std::int64_t i = 0; i < da.site_count(); ++i) {
      worst = std::max(worst, fa[i] - fb[i]);
    }
  }
  return std::max(0.0, worst);
}

}  // namespace fklab
