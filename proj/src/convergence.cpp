#include "fklab/convergence.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "fklab/parallel.hpp"

namespace fklab {

namespace {

std::int64_t exact_multiple(double extent, double eps, const char* what) {
  const double ratio = extent / eps;
  const auto cells = static_cast<std::int64_t>(std::llround(ratio));
  if (cells < 1 || std::abs(ratio - static_cast<double>(cells)) > 1e-9) {
    throw std::invalid_argument(std::string(what) + " " + std::to_string(extent) +
                                " is not an integer multiple of eps " + std::to_string(eps));
  }
  return cells;
}

void check_halving(std::span<const double> eps_list) {
  if (eps_list.empty()) throw std::invalid_argument("eps_list must not be empty");
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    if (std::abs(eps_list[i + 1] - 0.5 * eps_list[i]) > 1e-12 * eps_list[i]) {
      throw std::invalid_argument("eps_list must halve at every step; pair (" +
                                  std::to_string(eps_list[i]) + ", " +
                                  std::to_string(eps_list[i + 1]) + ") does not");
    }
  }
}

void check_reference(double eps_last, double eps_ref) {
  const double ratio = eps_last / eps_ref;
  const auto p = static_cast<std::int64_t>(std::llround(ratio));
  if (p < 1 || std::abs(ratio - static_cast<double>(p)) > 1e-9 || (p & (p - 1)) != 0) {
    throw std::invalid_argument("eps_ref " + std::to_string(eps_ref) +
                                " must divide the finest tested eps " + std::to_string(eps_last) +
                                " by a power of 2");
  }
}

double max_window_error(const Trajectory& tested, const Trajectory& reference,
                        const Window& window) {
  const DomainPtr dom = tested.snapshots.front().field.domain_ptr();
  double worst = 0.0;
  for (std::size_t s = 0; s < tested.snapshots.size(); ++s) {
    const Snapshot& a = tested.snapshots[s];
    const Snapshot& b = reference.snapshots[s];
    if (!window.contains_time(a.time)) continue;
    const LatticeField restricted = restrict_to(b.field, dom);
    worst = std::max(worst, sup_error(a.field, restricted, window));
  }
  return worst;
}

AuditSummary run_audits(const Scenario& sc, const Trajectory& traj, const StudyOptions& opts,
                        double T, std::span<const double> snapshot_times, WorkerPool* pool,
                        const LatticeField* u0c) {
  AuditSummary audit;
  if (opts.barrier_audit && u0c) {
    const BarrierPair barriers = make_barriers(sc, *u0c);
    const BarrierViolations v = barrier_audit(traj, barriers);
    audit.barrier_checked = true;
    audit.barrier_max = v.max;
    audit.barrier_tolerance = 5.0 * traj.dt_nominal * (barriers.C + barriers.sup_F);
    const double beta_tol = 5.0 * traj.dt_nominal * barriers.C_beta;
    audit.barrier_pass = v.max.upper <= audit.barrier_tolerance &&
                         v.max.lower <= audit.barrier_tolerance &&
                         v.max.flat <= audit.barrier_tolerance &&
                         (sc.beta == 0.0 || v.max.beta_bound <= beta_tol);
  }
  if (opts.ordering_offset > 0.0) {
    Scenario shifted = sc;
    shifted.profile = sc.profile.shifted(opts.ordering_offset);
    const Trajectory companion = simulate(shifted, T, {snapshot_times.begin(), snapshot_times.end()}, pool);
    audit.ordering_checked = true;
    audit.ordering_violation = ordering_audit(traj, companion);
    audit.ordering_pass = audit.ordering_violation <= 1e-12;
  }
  return audit;
}

void fill_ratios(std::span<const double> errors, double slack, std::vector<double>& ratios,
                 bool& monotone) {
  ratios.clear();
  monotone = true;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double prev = errors[i];
    const double next = errors[i + 1];
    const double ratio = prev > 0.0 ? next / prev : (next > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    ratios.push_back(ratio);
    if (next > slack * prev) monotone = false;
  }
}

}  // namespace

Scenario instantiate_scenario(const Scenario& base, const PhysicalExtents& ext, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  Scenario sc = base;
  sc.eps = eps;
  sc.lateral_halfwidth = base.n > 1 ? exact_multiple(ext.lateral, eps, "lateral extent") : 0;
  sc.height = exact_multiple(ext.height, eps, "height extent");
  return sc;
}

ConvergenceReport epsilon_study(const Scenario& base, const PhysicalExtents& ext,
                                const Window& window, std::span<const double> eps_list,
                                double eps_ref, double T, std::span<const double> snapshot_times,
                                const StudyOptions& opts, WorkerPool* pool) {
  check_halving(eps_list);
  if (eps_ref > eps_list.back() + 1e-15) {
    throw std::invalid_argument("eps_ref must not exceed the finest tested eps");
  }
  check_reference(eps_list.back(), eps_ref);

  ConvergenceReport report;
  report.window = window;
  report.eps_ref = eps_ref;

  const std::vector<double> times(snapshot_times.begin(), snapshot_times.end());

  Trajectory reference;
  try {
    Scenario ref_sc = instantiate_scenario(base, ext, eps_ref);
    window.validate_inside(*ref_sc.make_domain());
    reference = simulate(ref_sc, T, times, pool);
    report.reference_wall_ms = reference.wall_ms;
    report.reference_steps = reference.total_steps;
  } catch (const std::exception& e) {
    report.aborted = true;
    report.error = std::string("reference run failed: ") + e.what();
    return report;
  }

  for (double eps : eps_list) {
    try {
      Scenario sc = instantiate_scenario(base, ext, eps);
      window.validate_inside(*sc.make_domain());
      LatticeField u0c;
      const LatticeField* u0c_ptr = nullptr;
      if (opts.barrier_audit || sc.beta > 0.0 ||
          sc.closure == TruncationClosure::DirichletFromKernel) {
        u0c = sample_continuous_extension(sc.profile, sc.make_domain(), sc.quadrature, pool);
        u0c_ptr = &u0c;
      }
      const Trajectory traj = simulate(sc, T, times, pool, u0c_ptr);

      EpsilonRun run;
      run.eps = eps;
      run.steps = traj.total_steps;
      run.dt = traj.dt_nominal;
      run.wall_ms = traj.wall_ms;
      run.sup_error = max_window_error(traj, reference, window);
      run.audit = run_audits(sc, traj, opts, T, snapshot_times, pool, u0c_ptr);
      report.runs.push_back(std::move(run));
    } catch (const std::exception& e) {
      report.aborted = true;
      report.error = "run at eps " + std::to_string(eps) + " failed: " + e.what();
      return report;
    }
  }

  std::vector<double> errors;
  errors.reserve(report.runs.size());
  for (const auto& r : report.runs) errors.push_back(r.sup_error);
  fill_ratios(errors, opts.slack, report.ratios, report.monotone);
  return report;
}

BetaReport beta_study(const Scenario& base, const PhysicalExtents& ext, double eps,
                      std::span<const double> beta_list, double T,
                      std::span<const double> snapshot_times, double slack, WorkerPool* pool) {
  if (beta_list.empty()) throw std::invalid_argument("beta_list must not be empty");
  for (std::size_t i = 0; i < beta_list.size(); ++i) {
    if (!(beta_list[i] > 0.0)) throw std::invalid_argument("beta values must be positive");
    if (i > 0 && beta_list[i] >= beta_list[i - 1]) {
      throw std::invalid_argument("beta_list must be strictly decreasing");
    }
  }

  BetaReport report;
  report.eps = eps;
  const std::vector<double> times(snapshot_times.begin(), snapshot_times.end());

  Trajectory reference;
  LatticeField u0c;
  try {
    Scenario ref_sc = instantiate_scenario(base, ext, eps);
    ref_sc.beta = 0.0;
    u0c = sample_continuous_extension(ref_sc.profile, ref_sc.make_domain(), ref_sc.quadrature,
                                      pool);
    reference = simulate(ref_sc, T, times, pool, &u0c);
    report.reference_wall_ms = reference.wall_ms;
  } catch (const std::exception& e) {
    report.aborted = true;
    report.error = std::string("beta = 0 run failed: ") + e.what();
    return report;
  }

  const std::int64_t plane = reference.snapshots.front().field.domain().plane_size();
  for (double beta : beta_list) {
    try {
      Scenario sc = instantiate_scenario(base, ext, eps);
      sc.beta = beta;
      const Trajectory traj = simulate(sc, T, times, pool, &u0c);
      BetaRun run;
      run.beta = beta;
      run.steps = traj.total_steps;
      run.wall_ms = traj.wall_ms;
      for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        const LatticeField& ub = traj.snapshots[s].field;
        const LatticeField& u0 = reference.snapshots[s].field;
        for (std::int64_t i = 0; i < plane; ++i) {
          run.sup_diff = std::max(run.sup_diff, std::abs(ub[i] - u0[i]));
        }
      }
      report.runs.push_back(run);
    } catch (const std::exception& e) {
      report.aborted = true;
      report.error = "run at beta " + std::to_string(beta) + " failed: " + e.what();
      return report;
    }
  }

  std::vector<double> diffs;
  for (const auto& r : report.runs) diffs.push_back(r.sup_diff);
  fill_ratios(diffs, slack, report.ratios, report.monotone);
  return report;
}

ExtensionStudyReport extension_study(const BoundaryProfile& profile, const PhysicalExtents& ext,
                                     const Window& window, std::span<const double> eps_list,
                                     const KernelQuadrature& quad, double elliptic_tol,
                                     double slack, WorkerPool* pool) {
  check_halving(eps_list);
  ExtensionStudyReport report;

  for (double eps : eps_list) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const std::int64_t lateral = exact_multiple(ext.lateral, eps, "lateral extent");
      const std::int64_t height = exact_multiple(ext.height, eps, "height extent");
      const DomainPtr dom = make_domain_ptr(2, eps, lateral, height);
      window.validate_inside(*dom);

      const LatticeField u0c = sample_continuous_extension(profile, dom, quad, pool);
      const BoundaryField g = sample_boundary(profile, dom);
      auto faces = [&u0c](std::span<const double> x) {
        Coord c{};
        const LatticeDomain& d = u0c.domain();
        for (int k = 0; k < d.dim(); ++k) c[k] = std::llround(x[k] / d.eps());
        return u0c[d.offset(c)];
      };
      EllipticOptions opts;
      opts.method = EllipticOptions::Method::ConvexSweeps;
      LatticeField u0d =
          discrete_extension(g, TruncationClosure::DirichletFromKernel, elliptic_tol, faces, opts, pool);

      ExtensionRun run;
      run.eps = eps;
      run.residual = laplace_residual(u0d, false);
      run.sup_diff = sup_error(u0d, u0c, window);
      run.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      report.runs.push_back(run);
    } catch (const std::exception& e) {
      report.aborted = true;
      report.error = "extension run at eps " + std::to_string(eps) + " failed: " + e.what();
      return report;
    }
  }

  std::vector<double> diffs;
  for (const auto& r : report.runs) diffs.push_back(r.sup_diff);
  fill_ratios(diffs, slack, report.ratios, report.monotone);
  return report;
}

}  // namespace fklab
