#pragma once

#include <string>
#include <vector>

#include "fklab/convergence.hpp"
#include "fklab/dynamics.hpp"

namespace fklab {

enum class Command { Simulate, Extend, Converge, BetaStudy, ExtensionStudy, Barriers };

std::string command_name(Command c);

/// Parsed and fully validated run description. The canonical form (defaults
/// filled, keys sorted, no whitespace) is hashed to name the run directory,
/// so equal configs map to equal artifacts.
struct RunConfig {
  Command command = Command::Simulate;
  int n = 1;
  double beta = 0.0;
  double eps = 0.0;
  std::vector<double> eps_list;
  double eps_ref = 0.0;
  std::vector<double> beta_list;

  // scenario pieces
  double potential_amplitude = 0.0;  ///< 0 = no potential section given
  double sigma = 0.0;
  std::string nonlinearity_kind = "effective";  ///< effective|constant|zero|sine
  double nonlinearity_value = 0.0;
  std::string family_eps = "run";  ///< effective family: "run" or "zero"
  std::string profile_kind = "constant";  ///< constant|arctan|screw|edge
  double profile_width = 1.0;
  double profile_value = 0.0;
  double profile_amplitude = 1.0;
  double profile_offset = 0.0;

  PhysicalExtents extents;
  double T = 0.0;
  std::vector<double> snapshot_times;
  Window window{};
  bool has_window = false;

  double elliptic_tol = 1e-10;
  double quadrature_tol = 1e-8;
  double safety = 0.9;

  KernelQuadrature quadrature;
  std::string closure_kind = "kernel-dirichlet";  ///< kernel-dirichlet|zero-normal
  std::int64_t closure_refresh_every = 0;
  bool bulk_first = false;
  std::string solver_method = "sor";  ///< sor|convex
  double solver_omega = 0.0;

  bool audits_barrier = true;
  double ordering_offset = 0.0;
  bool audit_reference = false;
  double slack = 1.1;

  std::vector<double> heights;  ///< extend command sample heights
  std::string output_dir = "out";
  int workers = 1;

  std::string canonical;  ///< canonical JSON of the validated config
  std::string hash;       ///< 64-bit FNV-1a of the canonical form, hex

  /// Scenario for one eps (forcing, profile, closure, tolerances applied).
  Scenario make_scenario(double run_eps) const;
  Nonlinearity make_forcing(double run_eps) const;
  BoundaryProfile make_profile() const;
};

/// Parses a JSON config document, validates every field against the
/// preconditions of the operations it feeds, fills defaults, and computes the
/// canonical form and hash. Throws ConfigError listing every violation.
RunConfig parse_config(const std::string& text);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace fklab
