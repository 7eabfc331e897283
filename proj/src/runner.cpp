#include "fklab/runner.hpp"

#include <unistd.h>

#include <chrono>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fklab/field_io.hpp"
#include "fklab/parallel.hpp"

namespace fklab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += format_full(v);
    first = false;
  }
  row += '\n';
  return row;
}

json audit_json(const AuditSummary& a) {
  json out;
  out["barrier_checked"] = a.barrier_checked;
  if (a.barrier_checked) {
    out["barrier"] = {{"upper", a.barrier_max.upper},
                      {"lower", a.barrier_max.lower},
                      {"flat", a.barrier_max.flat},
                      {"beta_bound", a.barrier_max.beta_bound},
                      {"alt", a.barrier_max.alt},
                      {"tolerance", a.barrier_tolerance},
                      {"pass", a.barrier_pass}};
  }
  out["ordering_checked"] = a.ordering_checked;
  if (a.ordering_checked) {
    out["ordering"] = {{"violation", a.ordering_violation}, {"pass", a.ordering_pass}};
  }
  return out;
}

struct CommandOutput {
  int status = 0;
  json results;
  std::string message;
};

CommandOutput run_simulate(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const Scenario sc = cfg.make_scenario(cfg.eps);
  const Trajectory traj = simulate(sc, cfg.T, cfg.snapshot_times, pool);

  std::string snaps = "index,time,step,bulk_residual,boundary_residual\n";
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    char name[64];
    std::snprintf(name, sizeof(name), "state_%03zu.csv", i);
    save_field_csv(s.field, dir / name);
    snaps += std::to_string(i) + ',' + format_full(s.time) + ',' + std::to_string(s.step_index) +
             ',' + format_full(s.residual.bulk) + ',' + format_full(s.residual.boundary) + '\n';
  }
  write_text(dir / "snapshots.csv", snaps);

  out.results["snapshots"] = traj.snapshots.size();
  out.results["total_steps"] = traj.total_steps;
  out.results["dt_nominal"] = traj.dt_nominal;
  out.results["wall_ms"] = traj.wall_ms;
  return out;
}

CommandOutput run_barriers(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const Scenario sc = cfg.make_scenario(cfg.eps);
  const DomainPtr dom = sc.make_domain();
  const LatticeField u0c = sample_continuous_extension(sc.profile, dom, sc.quadrature, pool);
  const Trajectory traj = simulate(sc, cfg.T, cfg.snapshot_times, pool, &u0c);

  const LatticeField* u0_discrete =
      sc.beta == 0.0 ? &traj.snapshots.front().field : nullptr;
  const BarrierPair barriers = make_barriers(sc, u0c, u0_discrete);
  const BarrierViolations v = barrier_audit(traj, barriers);

  std::string rows = "time,upper,lower,flat,beta_bound,alt\n";
  for (const auto& r : v.rows) {
    rows += csv_row({r.time, r.upper, r.lower, r.flat, r.beta_bound, r.alt});
  }
  write_text(dir / "violations.csv", rows);

  const double tol = 5.0 * traj.dt_nominal * (barriers.C + barriers.sup_F);
  const double beta_tol = 5.0 * traj.dt_nominal * barriers.C_beta;
  const bool pass = v.max.upper <= tol && v.max.lower <= tol && v.max.flat <= tol &&
                    (sc.beta == 0.0 || v.max.beta_bound <= beta_tol);

  out.results["C"] = barriers.C;
  out.results["C_beta"] = barriers.C_beta;
  out.results["C_eps"] = barriers.C_eps;
  out.results["sup_u0"] = barriers.sup_u0;
  out.results["sup_F"] = barriers.sup_F;
  out.results["tolerance"] = tol;
  out.results["beta_tolerance"] = beta_tol;
  out.results["max_violations"] = {{"upper", v.max.upper},
                                   {"lower", v.max.lower},
                                   {"flat", v.max.flat},
                                   {"beta_bound", v.max.beta_bound},
                                   {"alt", v.max.alt}};
  out.results["pass"] = pass;
  out.results["wall_ms"] = traj.wall_ms;
  if (!pass) {
    out.status = 1;
    out.message = "barrier audit exceeded tolerance";
  }
  return out;
}

CommandOutput run_converge(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const Scenario base = cfg.make_scenario(cfg.eps_list.front());
  StudyOptions opts;
  opts.barrier_audit = cfg.audits_barrier;
  opts.audit_reference = cfg.audit_reference;
  opts.ordering_offset = cfg.ordering_offset;
  opts.slack = cfg.slack;

  const ConvergenceReport rep = epsilon_study(base, cfg.extents, cfg.window, cfg.eps_list,
                                              cfg.eps_ref, cfg.T, cfg.snapshot_times, opts, pool);

  std::string report = "eps,sup_error,ratio,steps\n";
  std::string timing = "eps,steps,wall_ms\n";
  std::string plot = "# eps sup_error\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const EpsilonRun& r = rep.runs[i];
    const double ratio = i == 0 ? std::numeric_limits<double>::quiet_NaN() : rep.ratios[i - 1];
    report += format_full(r.eps) + ',' + format_full(r.sup_error) + ',' + format_full(ratio) +
              ',' + std::to_string(r.steps) + '\n';
    timing += format_full(r.eps) + ',' + std::to_string(r.steps) + ',' + format_full(r.wall_ms) + '\n';
    plot += format_full(r.eps) + ' ' + format_full(r.sup_error) + '\n';
  }
  write_text(dir / "report.csv", report);
  write_text(dir / "timing.csv", timing);
  write_text(dir / "plot.dat", plot);

  out.results["eps_ref"] = rep.eps_ref;
  out.results["monotone"] = rep.monotone;
  out.results["aborted"] = rep.aborted;
  out.results["reference_steps"] = rep.reference_steps;
  out.results["reference_wall_ms"] = rep.reference_wall_ms;
  json runs = json::array();
  bool audits_pass = true;
  for (const EpsilonRun& r : rep.runs) {
    json jr;
    jr["eps"] = r.eps;
    jr["sup_error"] = r.sup_error;
    jr["steps"] = r.steps;
    jr["dt"] = r.dt;
    jr["wall_ms"] = r.wall_ms;
    jr["audit"] = audit_json(r.audit);
    audits_pass = audits_pass && r.audit.barrier_pass && r.audit.ordering_pass;
    runs.push_back(jr);
  }
  out.results["runs"] = runs;
  if (rep.aborted) {
    out.status = 1;
    out.message = rep.error;
  } else if (!rep.monotone) {
    out.status = 1;
    out.message = "error column is not decreasing within slack";
  } else if (!audits_pass) {
    out.status = 1;
    out.message = "a run audit exceeded tolerance";
  }
  return out;
}

CommandOutput run_beta_study(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const Scenario base = cfg.make_scenario(cfg.eps);
  const BetaReport rep = beta_study(base, cfg.extents, cfg.eps, cfg.beta_list, cfg.T,
                                    cfg.snapshot_times, cfg.slack, pool);

  std::string report = "beta,sup_diff,ratio,steps\n";
  std::string timing = "beta,steps,wall_ms\n";
  std::string plot = "# beta sup_diff\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const BetaRun& r = rep.runs[i];
    const double ratio = i == 0 ? std::numeric_limits<double>::quiet_NaN() : rep.ratios[i - 1];
    report += format_full(r.beta) + ',' + format_full(r.sup_diff) + ',' + format_full(ratio) +
              ',' + std::to_string(r.steps) + '\n';
    timing += format_full(r.beta) + ',' + std::to_string(r.steps) + ',' + format_full(r.wall_ms) + '\n';
    plot += format_full(r.beta) + ' ' + format_full(r.sup_diff) + '\n';
  }
  write_text(dir / "report.csv", report);
  write_text(dir / "timing.csv", timing);
  write_text(dir / "plot.dat", plot);

  out.results["eps"] = rep.eps;
  out.results["monotone"] = rep.monotone;
  out.results["aborted"] = rep.aborted;
  if (rep.aborted) {
    out.status = 1;
    out.message = rep.error;
  } else if (!rep.monotone) {
    out.status = 1;
    out.message = "beta differences are not decreasing within slack";
  }
  return out;
}

CommandOutput run_extension_study(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const BoundaryProfile profile = cfg.make_profile();
  KernelQuadrature quad = cfg.quadrature;
  const ExtensionStudyReport rep = extension_study(profile, cfg.extents, cfg.window, cfg.eps_list,
                                                   quad, cfg.elliptic_tol, cfg.slack, pool);

  std::string report = "eps,sup_diff,ratio,sweeps,residual\n";
  std::string timing = "eps,sweeps,wall_ms\n";
  std::string plot = "# eps sup_diff\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const ExtensionRun& r = rep.runs[i];
    const double ratio = i == 0 ? std::numeric_limits<double>::quiet_NaN() : rep.ratios[i - 1];
    report += format_full(r.eps) + ',' + format_full(r.sup_diff) + ',' + format_full(ratio) + ',' +
              std::to_string(r.sweeps) + ',' + format_full(r.residual) + '\n';
    timing += format_full(r.eps) + ',' + std::to_string(r.sweeps) + ',' + format_full(r.wall_ms) + '\n';
    plot += format_full(r.eps) + ' ' + format_full(r.sup_diff) + '\n';
  }
  write_text(dir / "report.csv", report);
  write_text(dir / "timing.csv", timing);
  write_text(dir / "plot.dat", plot);

  out.results["monotone"] = rep.monotone;
  out.results["aborted"] = rep.aborted;
  if (rep.aborted) {
    out.status = 1;
    out.message = rep.error;
  } else if (!rep.monotone) {
    out.status = 1;
    out.message = "extension differences are not decreasing within slack";
  }
  return out;
}

CommandOutput run_extend(const RunConfig& cfg, const fs::path& dir, WorkerPool* pool) {
  CommandOutput out;
  const BoundaryProfile profile = cfg.make_profile();
  const std::int64_t lateral = std::llround(cfg.extents.lateral / cfg.eps);
  const std::int64_t height = std::llround(cfg.extents.height / cfg.eps);
  const DomainPtr dom = make_domain_ptr(cfg.n, cfg.eps, lateral, height);

  const LatticeField u0c = sample_continuous_extension(profile, dom, cfg.quadrature, pool);
  save_field_csv(u0c, dir / "continuous_extension.csv");

  const BoundaryField g = sample_boundary(profile, dom);
  auto faces = [&u0c](std::span<const double> x) {
    Coord c{};
    const LatticeDomain& d = u0c.domain();
    for (int k = 0; k < d.dim(); ++k) c[k] = std::llround(x[k] / d.eps());
    return u0c[d.offset(c)];
  };
  EllipticOptions opts;
  opts.method = EllipticOptions::Method::ConvexSweeps;
  const LatticeField u0d = discrete_extension(g, TruncationClosure::DirichletFromKernel,
                                              cfg.elliptic_tol, faces, opts, pool);
  save_field_csv(u0d, dir / "discrete_extension.csv");

  const ExtensionReport rep =
      decay_report(profile, cfg.heights, cfg.quadrature, cfg.eps, cfg.n);
  std::string csv = "height,grad_product,hess_product,d_eps_product,lap_eps_product\n";
  for (const auto& r : rep.rows) {
    csv += csv_row({r.height, r.grad_product, r.hess_product, r.d_eps_product, r.lap_eps_product});
  }
  write_text(dir / "extension_report.csv", csv);

  out.results["fitted"] = {{"grad", rep.fitted_grad},
                           {"hess", rep.fitted_hess},
                           {"d_eps", rep.fitted_d_eps},
                           {"lap_eps", rep.fitted_lap_eps}};
  out.results["growth_flag"] = rep.growth_flag;
  out.results["extension_sup_diff"] = sup_error(
      u0d, u0c,
      Window{0.9 * dom->lateral_extent(), 0.9 * dom->vertical_extent(), 0.0, 0.0});
  return out;
}

}  // namespace

RunResult run(const RunConfig& cfg, const fs::path& out_override, int workers_override,
              bool seedless) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;

  const fs::path outdir = out_override.empty() ? fs::path(cfg.output_dir) : out_override;
  const int workers = workers_override > 0 ? workers_override : cfg.workers;
  const std::string dirname = command_name(cfg.command) + "-" + cfg.hash;
  const fs::path final_dir = outdir / dirname;
  const fs::path tmp_dir =
      outdir / (".tmp-" + cfg.hash + "-" + std::to_string(::getpid()));

  try {
    fs::create_directories(tmp_dir);
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = "cannot create " + tmp_dir.string() + ": " + e.what();
    return result;
  }

  WorkerPool pool(workers);
  CommandOutput out;
  try {
    switch (cfg.command) {
      case Command::Simulate: out = run_simulate(cfg, tmp_dir, &pool); break;
      case Command::Extend: out = run_extend(cfg, tmp_dir, &pool); break;
      case Command::Converge: out = run_converge(cfg, tmp_dir, &pool); break;
      case Command::BetaStudy: out = run_beta_study(cfg, tmp_dir, &pool); break;
      case Command::ExtensionStudy: out = run_extension_study(cfg, tmp_dir, &pool); break;
      case Command::Barriers: out = run_barriers(cfg, tmp_dir, &pool); break;
    }
  } catch (const std::exception& e) {
    out.status = 1;
    out.message = e.what();
  }

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  json manifest;
  manifest["version"] = "0.1.0";
  manifest["command"] = command_name(cfg.command);
  manifest["config_hash"] = cfg.hash;
  manifest["config"] = json::parse(cfg.canonical);
  manifest["workers"] = workers;
  manifest["seedless"] = seedless;
  manifest["rng"] = "none";
  manifest["wall_ms"] = wall_ms;
  manifest["results"] = out.results;
  manifest["status"] = out.status;
  if (!out.message.empty()) manifest["message"] = out.message;

  try {
    write_text(tmp_dir / "manifest.json", manifest.dump(2) + "\n");
    if (fs::exists(final_dir)) fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = "cannot finalize " + final_dir.string() + ": " + e.what();
    return result;
  }

  result.exit_code = out.status;
  result.artifact_dir = final_dir;
  result.message = out.message;
  return result;
}

}  // namespace fklab
