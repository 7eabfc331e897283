#pragma once

#include <string>
#include <vector>

#include "fklab/dynamics.hpp"

namespace fklab {

/// Shared truncation box for every run of a study, in physical units.
struct PhysicalExtents {
  double lateral = 0.0;
  double height = 0.0;
};

/// Builds the run-specific scenario on the shared box; extents must be
/// integer multiples of eps.
Scenario instantiate_scenario(const Scenario& base, const PhysicalExtents& ext, double eps);

struct AuditSummary {
  bool barrier_checked = false;
  BarrierViolationRow barrier_max;
  double barrier_tolerance = 0.0;
  bool barrier_pass = true;
  bool ordering_checked = false;
  double ordering_violation = 0.0;
  bool ordering_pass = true;
};

struct StudyOptions {
  bool barrier_audit = true;
  bool audit_reference = false;   ///< also barrier-audit the reference run
  double ordering_offset = 0.0;   ///< > 0 runs a shifted companion per tested eps
  double slack = 1.1;             ///< pair passes when next <= slack * prev
};

struct EpsilonRun {
  double eps = 0.0;
  double sup_error = 0.0;  ///< vs the reference run, max over snapshot times
  std::int64_t steps = 0;
  double dt = 0.0;
  double wall_ms = 0.0;
  AuditSummary audit;
};

/// Sup-norm distances to a common fine-lattice reference; the reference is
/// the scheme's own run at eps_ref, so every error column reads
/// "vs reference", never "vs exact".
struct ConvergenceReport {
  std::string scenario_id;
  Window window;
  double eps_ref = 0.0;
  std::vector<EpsilonRun> runs;  ///< ordered by decreasing eps
  double reference_wall_ms = 0.0;
  std::int64_t reference_steps = 0;
  std::vector<double> ratios;  ///< runs[i+1].sup_error / runs[i].sup_error
  bool monotone = true;
  bool aborted = false;
  std::string error;
};

ConvergenceReport epsilon_study(const Scenario& base, const PhysicalExtents& ext,
                                const Window& window, std::span<const double> eps_list,
                                double eps_ref, double T, std::span<const double> snapshot_times,
                                const StudyOptions& opts = {}, WorkerPool* pool = nullptr);

struct BetaRun {
  double beta = 0.0;
  double sup_diff = 0.0;  ///< boundary-plane distance to the beta = 0 run
  std::int64_t steps = 0;
  double wall_ms = 0.0;
};

struct BetaReport {
  std::string scenario_id;
  double eps = 0.0;
  std::vector<BetaRun> runs;  ///< ordered by decreasing beta
  double reference_wall_ms = 0.0;
  std::vector<double> ratios;
  bool monotone = true;
  bool aborted = false;
  std::string error;
};

BetaReport beta_study(const Scenario& base, const PhysicalExtents& ext, double eps,
                      std::span<const double> beta_list, double T,
                      std::span<const double> snapshot_times, double slack = 1.1,
                      WorkerPool* pool = nullptr);

struct ExtensionRun {
  double eps = 0.0;
  double sup_diff = 0.0;  ///< |u_0^{D,eps} - u_0^c| over the window
  double residual = 0.0;
  std::int64_t sweeps = 0;
  double wall_ms = 0.0;
};

struct ExtensionStudyReport {
  std::string scenario_id;
  std::vector<ExtensionRun> runs;
  std::vector<double> ratios;
  bool monotone = true;
  bool aborted = false;
  std::string error;
};

ExtensionStudyReport extension_study(const BoundaryProfile& profile, const PhysicalExtents& ext,
                                     const Window& window, std::span<const double> eps_list,
                                     const KernelQuadrature& quad, double elliptic_tol = 1e-10,
                                     double slack = 1.1, WorkerPool* pool = nullptr);

}  // namespace fklab
