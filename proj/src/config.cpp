#include "fklab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace fklab {

using nlohmann::json;

std::string command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Extend: return "extend";
    case Command::Converge: return "converge";
    case Command::BetaStudy: return "beta-study";
    case Command::ExtensionStudy: return "extension-study";
    case Command::Barriers: return "barriers";
  }
  return "?";
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct Checker {
  std::vector<std::string> issues;

  void fail(const std::string& msg) { issues.push_back(msg); }

  void known_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!allowed.count(key)) fail("unknown key '" + where + key + "'");
    }
  }

  double number(const json& obj, const std::string& where, const std::string& key, double fallback,
                bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail("missing required field '" + where + key + "'");
      return fallback;
    }
    if (!obj[key].is_number()) {
      fail("field '" + where + key + "' must be a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  std::int64_t integer(const json& obj, const std::string& where, const std::string& key,
                       std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
      fail("field '" + where + key + "' must be an integer");
      return fallback;
    }
    return obj[key].get<std::int64_t>();
  }

  bool boolean(const json& obj, const std::string& where, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
      fail("field '" + where + key + "' must be a boolean");
      return fallback;
    }
    return obj[key].get<bool>();
  }

  std::string text(const json& obj, const std::string& where, const std::string& key,
                   const std::string& fallback, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail("missing required field '" + where + key + "'");
      return fallback;
    }
    if (!obj[key].is_string()) {
      fail("field '" + where + key + "' must be a string");
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  std::vector<double> number_list(const json& obj, const std::string& where,
                                  const std::string& key) {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    if (!obj[key].is_array()) {
      fail("field '" + where + key + "' must be an array of numbers");
      return out;
    }
    for (const auto& v : obj[key]) {
      if (!v.is_number()) {
        fail("field '" + where + key + "' must contain numbers only");
        return {};
      }
      out.push_back(v.get<double>());
    }
    return out;
  }
};

bool is_halving(std::span<const double> eps_list, std::string* bad_pair) {
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    if (std::abs(eps_list[i + 1] - 0.5 * eps_list[i]) > 1e-12 * eps_list[i]) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "(%g, %g)", eps_list[i], eps_list[i + 1]);
      *bad_pair = buf;
      return false;
    }
  }
  return true;
}

bool divides_by_pow2(double coarse, double fine) {
  const double ratio = coarse / fine;
  const auto p = static_cast<std::int64_t>(std::llround(ratio));
  return p >= 1 && std::abs(ratio - static_cast<double>(p)) <= 1e-9 && (p & (p - 1)) == 0;
}

bool extent_divisible(double extent, double eps) {
  const double ratio = extent / eps;
  const auto cells = static_cast<std::int64_t>(std::llround(ratio));
  return cells >= 1 && std::abs(ratio - static_cast<double>(cells)) <= 1e-9;
}

json canonical_json(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  j["n"] = c.n;
  j["beta"] = c.beta;
  if (c.command == Command::Converge || c.command == Command::ExtensionStudy) {
    j["eps_list"] = c.eps_list;
  } else {
    j["eps"] = c.eps;
  }
  if (c.command == Command::Converge) j["eps_ref"] = c.eps_ref;
  if (c.command == Command::BetaStudy) j["beta_list"] = c.beta_list;
  if (c.potential_amplitude > 0.0) {
    j["potential"] = {{"kind", "cosine"}, {"amplitude", c.potential_amplitude}};
    j["sigma"] = c.sigma;
  }
  j["nonlinearity"] = {{"kind", c.nonlinearity_kind},
                       {"value", c.nonlinearity_value},
                       {"family_eps", c.family_eps}};
  j["profile"] = {{"kind", c.profile_kind},
                  {"width", c.profile_width},
                  {"value", c.profile_value},
                  {"amplitude", c.profile_amplitude},
                  {"offset", c.profile_offset}};
  j["domain"] = {{"lateral_extent", c.extents.lateral}, {"height_extent", c.extents.height}};
  j["T"] = c.T;
  j["snapshot_times"] = c.snapshot_times;
  if (c.has_window) {
    j["window"] = {{"lateral_radius", c.window.lateral_radius},
                   {"height", c.window.height},
                   {"t_begin", c.window.t_begin},
                   {"t_end", c.window.t_end}};
  }
  j["tolerances"] = {{"elliptic", c.elliptic_tol}, {"quadrature", c.quadrature_tol},
                     {"safety", c.safety}};
  j["quadrature"] = {{"radius", c.quadrature.radius},
                     {"panels", c.quadrature.panels},
                     {"tail", c.quadrature.tail_correction},
                     {"richardson", c.quadrature.richardson}};
  j["closure"] = {{"kind", c.closure_kind},
                  {"refresh_every", c.closure_refresh_every},
                  {"bulk_first", c.bulk_first}};
  j["solver"] = {{"method", c.solver_method}, {"omega", c.solver_omega}};
  j["audits"] = {{"barrier", c.audits_barrier},
                 {"ordering_offset", c.ordering_offset},
                 {"audit_reference", c.audit_reference},
                 {"slack", c.slack}};
  if (c.command == Command::Extend) j["heights"] = c.heights;
  j["workers"] = c.workers;
  return j;
}

}  // namespace

Nonlinearity RunConfig::make_forcing(double run_eps) const {
  if (nonlinearity_kind == "constant") return constant_nonlinearity(nonlinearity_value);
  if (nonlinearity_kind == "zero") return zero_nonlinearity();
  if (nonlinearity_kind == "sine") return sine_nonlinearity();
  const PeriodicPotential w = cosine_potential(potential_amplitude);
  const double fam_eps = family_eps == "zero" ? 0.0 : run_eps;
  return effective_nonlinearity(w, sigma, fam_eps);
}

BoundaryProfile RunConfig::make_profile() const {
  if (profile_kind == "constant") return BoundaryProfile::constant(profile_value);
  if (profile_kind == "arctan") {
    return BoundaryProfile::arctan(profile_amplitude, profile_width, 0, profile_offset);
  }
  const DislocationKind kind =
      profile_kind == "screw" ? DislocationKind::Screw : DislocationKind::Edge;
  BoundaryProfile p = dislocation_profile(kind, profile_width, n);
  if (profile_offset != 0.0) p = p.shifted(profile_offset);
  return p;
}

Scenario RunConfig::make_scenario(double run_eps) const {
  Scenario sc;
  sc.n = n;
  sc.eps = run_eps;
  sc.lateral_halfwidth = n > 1 ? std::llround(extents.lateral / run_eps) : 0;
  sc.height = std::llround(extents.height / run_eps);
  sc.beta = beta;
  sc.forcing = make_forcing(run_eps);
  sc.profile = make_profile();
  sc.closure = closure_kind == "zero-normal" ? TruncationClosure::ZeroNormalDifference
                                             : TruncationClosure::DirichletFromKernel;
  sc.closure_refresh_every = closure_refresh_every;
  sc.resolve_bulk_first = bulk_first;
  sc.safety = safety;
  sc.elliptic_tol = elliptic_tol;
  sc.quadrature = quadrature;
  sc.quadrature.tol = quadrature_tol;
  sc.elliptic.method = solver_method == "convex" ? EllipticOptions::Method::ConvexSweeps
                                                 : EllipticOptions::Method::RedBlackSor;
  sc.elliptic.omega = solver_omega;
  return sc;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"config root must be a JSON object"});

  Checker ck;
  RunConfig c;

  ck.known_keys(j, "", {"command", "n", "beta", "eps", "eps_list", "eps_ref", "beta_list",
                        "potential", "sigma", "nonlinearity", "profile", "domain", "T",
                        "snapshot_times", "window", "tolerances", "quadrature", "closure",
                        "solver", "audits", "heights", "output", "workers"});

  const std::string cmd = ck.text(j, "", "command", "", true);
  if (cmd == "simulate") {
    c.command = Command::Simulate;
  } else if (cmd == "extend") {
    c.command = Command::Extend;
  } else if (cmd == "converge") {
    c.command = Command::Converge;
  } else if (cmd == "beta-study") {
    c.command = Command::BetaStudy;
  } else if (cmd == "extension-study") {
    c.command = Command::ExtensionStudy;
  } else if (cmd == "barriers") {
    c.command = Command::Barriers;
  } else if (!cmd.empty()) {
    ck.fail("unknown command '" + cmd + "'");
  }

  c.n = static_cast<int>(ck.integer(j, "", "n", 1));
  if (c.n < 1 || c.n > kMaxDim) ck.fail("n must lie in [1, 4]");

  c.beta = ck.number(j, "", "beta", 0.0);
  if (c.beta < 0.0) ck.fail("beta must be >= 0");

  const bool wants_list = c.command == Command::Converge || c.command == Command::ExtensionStudy;
  if (wants_list) {
    c.eps_list = ck.number_list(j, "", "eps_list");
    if (c.eps_list.empty()) {
      ck.fail("command '" + cmd + "' needs a non-empty eps_list");
    } else {
      for (double e : c.eps_list) {
        if (!(e > 0.0)) ck.fail("eps_list entries must be positive");
      }
      std::string pair;
      if (!is_halving(c.eps_list, &pair)) {
        ck.fail("eps_list must halve at every step; pair " + pair + " is not nested");
      }
    }
    if (c.command == Command::Converge) {
      c.eps_ref = ck.number(j, "", "eps_ref", 0.0, true);
      if (!(c.eps_ref > 0.0)) {
        ck.fail("eps_ref must be positive");
      } else if (!c.eps_list.empty()) {
        if (c.eps_ref > c.eps_list.back() + 1e-15) {
          ck.fail("eps_ref must not exceed the finest tested eps");
        } else if (!divides_by_pow2(c.eps_list.back(), c.eps_ref)) {
          ck.fail("eps_ref must divide the finest tested eps by a power of 2");
        }
      }
    }
  } else {
    c.eps = ck.number(j, "", "eps", 0.0, true);
    if (!(c.eps > 0.0)) ck.fail("eps must be positive");
  }

  if (c.command == Command::BetaStudy) {
    c.beta_list = ck.number_list(j, "", "beta_list");
    if (c.beta_list.empty()) ck.fail("beta-study needs a non-empty beta_list");
    for (std::size_t i = 0; i < c.beta_list.size(); ++i) {
      if (!(c.beta_list[i] > 0.0)) ck.fail("beta_list entries must be positive");
      if (i > 0 && c.beta_list[i] >= c.beta_list[i - 1]) {
        ck.fail("beta_list must be strictly decreasing");
      }
    }
  }

  if (j.contains("potential")) {
    const json& p = j["potential"];
    if (!p.is_object()) {
      ck.fail("'potential' must be an object");
    } else {
      ck.known_keys(p, "potential.", {"kind", "amplitude"});
      const std::string kind = ck.text(p, "potential.", "kind", "cosine");
      if (kind != "cosine") ck.fail("unknown potential kind '" + kind + "'");
      c.potential_amplitude = ck.number(p, "potential.", "amplitude", 0.0, true);
      if (!(c.potential_amplitude > 0.0)) ck.fail("potential amplitude must be positive");
    }
  }
  c.sigma = ck.number(j, "", "sigma", 0.0);

  if (j.contains("nonlinearity")) {
    const json& f = j["nonlinearity"];
    if (!f.is_object()) {
      ck.fail("'nonlinearity' must be an object");
    } else {
      ck.known_keys(f, "nonlinearity.", {"kind", "value", "family_eps"});
      c.nonlinearity_kind = ck.text(f, "nonlinearity.", "kind", "effective");
      c.nonlinearity_value = ck.number(f, "nonlinearity.", "value", 0.0);
      c.family_eps = ck.text(f, "nonlinearity.", "family_eps", "run");
      if (c.nonlinearity_kind != "effective" && c.nonlinearity_kind != "constant" &&
          c.nonlinearity_kind != "zero" && c.nonlinearity_kind != "sine") {
        ck.fail("unknown nonlinearity kind '" + c.nonlinearity_kind + "'");
      }
      if (c.family_eps != "run" && c.family_eps != "zero") {
        ck.fail("nonlinearity.family_eps must be 'run' or 'zero'");
      }
    }
  }
  if (c.nonlinearity_kind == "effective" && !(c.potential_amplitude > 0.0)) {
    ck.fail("the effective nonlinearity needs a potential section");
  }

  if (j.contains("profile")) {
    const json& p = j["profile"];
    if (!p.is_object()) {
      ck.fail("'profile' must be an object");
    } else {
      ck.known_keys(p, "profile.", {"kind", "width", "value", "amplitude", "offset"});
      c.profile_kind = ck.text(p, "profile.", "kind", "constant");
      c.profile_width = ck.number(p, "profile.", "width", 1.0);
      c.profile_value = ck.number(p, "profile.", "value", 0.0);
      c.profile_amplitude = ck.number(p, "profile.", "amplitude", 1.0);
      c.profile_offset = ck.number(p, "profile.", "offset", 0.0);
      if (c.profile_kind != "constant" && c.profile_kind != "arctan" &&
          c.profile_kind != "screw" && c.profile_kind != "edge") {
        ck.fail("unknown profile kind '" + c.profile_kind + "'");
      }
      if (c.profile_kind != "constant" && !(c.profile_width > 0.0)) {
        ck.fail("profile width must be positive");
      }
      if (c.profile_kind == "edge" && c.n < 3) ck.fail("edge profiles need n >= 3");
      if ((c.profile_kind == "screw" || c.profile_kind == "arctan") && c.n < 2 &&
          c.command != Command::Extend) {
        ck.fail("profiles varying along a lateral axis need n >= 2");
      }
    }
  }

  if (j.contains("domain")) {
    const json& d = j["domain"];
    if (!d.is_object()) {
      ck.fail("'domain' must be an object");
    } else {
      ck.known_keys(d, "domain.", {"lateral_extent", "height_extent"});
      c.extents.lateral = ck.number(d, "domain.", "lateral_extent", 0.0, c.n > 1);
      c.extents.height = ck.number(d, "domain.", "height_extent", 0.0, true);
      if (c.n > 1 && !(c.extents.lateral > 0.0)) ck.fail("lateral extent must be positive");
      if (!(c.extents.height > 0.0)) ck.fail("height extent must be positive");
    }
  } else if (c.command != Command::Extend) {
    ck.fail("missing required section 'domain'");
  }

  // every lattice the run builds must fit the extents exactly
  std::vector<double> all_eps;
  if (wants_list) {
    all_eps = c.eps_list;
    if (c.command == Command::Converge && c.eps_ref > 0.0) all_eps.push_back(c.eps_ref);
  } else if (c.eps > 0.0) {
    all_eps.push_back(c.eps);
  }
  for (double e : all_eps) {
    if (c.extents.height > 0.0 && !extent_divisible(c.extents.height, e)) {
      ck.fail("height extent is not an integer multiple of eps " + std::to_string(e));
    }
    if (c.n > 1 && c.extents.lateral > 0.0 && !extent_divisible(c.extents.lateral, e)) {
      ck.fail("lateral extent is not an integer multiple of eps " + std::to_string(e));
    }
  }

  c.T = ck.number(j, "", "T", 0.0,
                  c.command == Command::Simulate || c.command == Command::Converge ||
                      c.command == Command::BetaStudy || c.command == Command::Barriers);
  if (c.T < 0.0) ck.fail("T must be >= 0");
  c.snapshot_times = ck.number_list(j, "", "snapshot_times");
  for (double t : c.snapshot_times) {
    if (t < 0.0 || t > c.T + 1e-12) ck.fail("snapshot times must lie in [0, T]");
  }
  std::sort(c.snapshot_times.begin(), c.snapshot_times.end());

  if (j.contains("window")) {
    const json& w = j["window"];
    if (!w.is_object()) {
      ck.fail("'window' must be an object");
    } else {
      ck.known_keys(w, "window.", {"lateral_radius", "height", "t_begin", "t_end"});
      c.window.lateral_radius = ck.number(w, "window.", "lateral_radius", 0.0, true);
      c.window.height = ck.number(w, "window.", "height", 0.0, true);
      c.window.t_begin = ck.number(w, "window.", "t_begin", 0.0);
      c.window.t_end = ck.number(w, "window.", "t_end", c.T);
      c.has_window = true;
      if (c.window.lateral_radius < 0.0 || c.window.height < 0.0) {
        ck.fail("window extents must be nonnegative");
      }
      if (c.n > 1 && c.extents.lateral > 0.0 && c.window.lateral_radius >= c.extents.lateral) {
        ck.fail("window lateral radius must lie strictly inside the lateral extent");
      }
      if (c.extents.height > 0.0 && c.window.height >= c.extents.height) {
        ck.fail("window height must lie strictly inside the height extent");
      }
      if (c.window.t_end < c.window.t_begin) ck.fail("window needs t_begin <= t_end");
    }
  } else if (c.command == Command::Converge || c.command == Command::ExtensionStudy) {
    ck.fail("missing required section 'window'");
  }

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) {
      ck.fail("'tolerances' must be an object");
    } else {
      ck.known_keys(t, "tolerances.", {"elliptic", "quadrature", "safety"});
      c.elliptic_tol = ck.number(t, "tolerances.", "elliptic", 1e-10);
      c.quadrature_tol = ck.number(t, "tolerances.", "quadrature", 1e-8);
      c.safety = ck.number(t, "tolerances.", "safety", 0.9);
      if (!(c.elliptic_tol > 0.0)) ck.fail("elliptic tolerance must be positive");
      if (!(c.quadrature_tol > 0.0)) ck.fail("quadrature tolerance must be positive");
      if (!(c.safety > 0.0) || c.safety > 1.0) ck.fail("safety must lie in (0, 1]");
    }
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    if (!q.is_object()) {
      ck.fail("'quadrature' must be an object");
    } else {
      ck.known_keys(q, "quadrature.", {"radius", "panels", "tail", "richardson"});
      c.quadrature.radius = ck.number(q, "quadrature.", "radius", 64.0);
      c.quadrature.panels = ck.integer(q, "quadrature.", "panels", 4096);
      c.quadrature.tail_correction = ck.boolean(q, "quadrature.", "tail", true);
      c.quadrature.richardson = ck.boolean(q, "quadrature.", "richardson", true);
      if (c.quadrature.panels < 8) ck.fail("quadrature needs at least 8 panels per axis");
      if (!(c.quadrature.radius > 0.0)) ck.fail("quadrature radius must be positive");
    }
  }
  c.quadrature.tol = c.quadrature_tol;
  if (c.n > 1 && c.extents.height > 0.0 && c.quadrature.radius < 8.0 * c.extents.height) {
    ck.fail("quadrature radius must be >= 8 x the height extent");
  }

  if (j.contains("closure")) {
    const json& cl = j["closure"];
    if (!cl.is_object()) {
      ck.fail("'closure' must be an object");
    } else {
      ck.known_keys(cl, "closure.", {"kind", "refresh_every", "bulk_first"});
      c.closure_kind = ck.text(cl, "closure.", "kind", "kernel-dirichlet");
      c.closure_refresh_every = ck.integer(cl, "closure.", "refresh_every", 0);
      c.bulk_first = ck.boolean(cl, "closure.", "bulk_first", false);
      if (c.closure_kind != "kernel-dirichlet" && c.closure_kind != "zero-normal") {
        ck.fail("closure kind must be 'kernel-dirichlet' or 'zero-normal'");
      }
      if (c.closure_refresh_every < 0) ck.fail("closure refresh_every must be >= 0");
      if (c.closure_refresh_every > 0 && c.n > 2) {
        ck.fail("closure refresh is implemented for n <= 2");
      }
    }
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) {
      ck.fail("'solver' must be an object");
    } else {
      ck.known_keys(s, "solver.", {"method", "omega"});
      c.solver_method = ck.text(s, "solver.", "method", "sor");
      c.solver_omega = ck.number(s, "solver.", "omega", 0.0);
      if (c.solver_method != "sor" && c.solver_method != "convex") {
        ck.fail("solver method must be 'sor' or 'convex'");
      }
      if (c.solver_omega < 0.0 || c.solver_omega >= 2.0) {
        ck.fail("solver omega must lie in [0, 2)");
      }
    }
  }

  if (j.contains("audits")) {
    const json& a = j["audits"];
    if (!a.is_object()) {
      ck.fail("'audits' must be an object");
    } else {
      ck.known_keys(a, "audits.", {"barrier", "ordering_offset", "audit_reference", "slack"});
      c.audits_barrier = ck.boolean(a, "audits.", "barrier", true);
      c.ordering_offset = ck.number(a, "audits.", "ordering_offset", 0.0);
      c.audit_reference = ck.boolean(a, "audits.", "audit_reference", false);
      c.slack = ck.number(a, "audits.", "slack", 1.1);
      if (c.ordering_offset < 0.0) ck.fail("audits.ordering_offset must be >= 0");
      if (!(c.slack >= 1.0)) ck.fail("audits.slack must be >= 1");
    }
  }

  if (c.command == Command::Extend) {
    c.heights = ck.number_list(j, "", "heights");
    if (c.heights.empty()) c.heights = {1.0, 2.0, 4.0, 8.0};
    for (double h : c.heights) {
      if (!(h > 0.0)) ck.fail("heights must be positive");
    }
    if (c.n < 2) ck.fail("the extend command needs n >= 2");
    for (double h : c.heights) {
      if (c.quadrature.radius < 8.0 * h) {
        ck.fail("quadrature radius must be >= 8 x every sampled height");
        break;
      }
    }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) {
      ck.fail("'output' must be an object");
    } else {
      ck.known_keys(o, "output.", {"dir"});
      c.output_dir = ck.text(o, "output.", "dir", "out");
    }
  }
  c.workers = static_cast<int>(ck.integer(j, "", "workers", 1));
  if (c.workers < 1) ck.fail("workers must be >= 1");

  // cross checks that need the assembled pieces
  if (ck.issues.empty() && c.command != Command::Extend) {
    for (double e : all_eps) {
      if (c.n > 1 && std::llround(c.extents.lateral / e) < 1) {
        ck.fail("lateral extent must cover at least one lattice cell");
      }
    }
  }

  if (!ck.issues.empty()) throw ConfigError(std::move(ck.issues));

  const json canon = canonical_json(c);
  c.canonical = canon.dump();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(c.canonical)));
  c.hash = buf;
  return c;
}

}  // namespace fklab
