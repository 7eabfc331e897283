#include <algorithm>
#include <cmath>

#include "fklab/harmonic.hpp"
#include "fklab/parallel.hpp"
#include "stencil_plan.hpp"

namespace fklab {

using detail::LaplacePlan;

namespace {

constexpr double kPi = 3.14159265358979323846;

double auto_omega(const LatticeDomain& dom, bool reflect_faces) {
  // Jacobi spectral radius estimate for the unknown box, then the classical
  // optimal over-relaxation factor.
  const int n = dom.dim();
  double rho = 0.0;
  int axes = 0;
  for (int k = 0; k + 1 < n; ++k) {
    const std::int64_t width = reflect_faces
                                   ? 2 * dom.lateral_halfwidth() + 1
                                   : std::max<std::int64_t>(1, 2 * dom.lateral_halfwidth() - 1);
    rho += std::cos(kPi / static_cast<double>(width + 1));
    ++axes;
  }
  const std::int64_t layers =
      reflect_faces ? dom.height() : std::max<std::int64_t>(1, dom.height() - 1);
  rho += std::cos(kPi / static_cast<double>(layers + 1));
  ++axes;
  rho /= static_cast<double>(axes);
  const double omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
  return std::clamp(omega, 1.0, 1.97);
}

double plan_residual(const LatticeField& u, const LaplacePlan& plan, WorkerPool* pool) {
  const double inv_eps2 = 1.0 / (u.domain().eps() * u.domain().eps());
  const double* v = u.values().data();
  const int nn = plan.n_neighbors;

  double worst = 0.0;
  auto scan_full = [&](const std::vector<std::int64_t>& list, std::int64_t b, std::int64_t e) {
    double w = 0.0;
    for (std::int64_t j = b; j < e; ++j) {
      const std::int64_t i = list[j];
      double sum = 0.0;
      for (int k = 0; k < nn; ++k) sum += v[i + plan.strides[k]];
      w = std::max(w, std::abs(sum - nn * v[i]));
    }
    return w;
  };

  for (int p = 0; p < 2; ++p) {
    const auto& list = plan.full[p];
    const auto count = static_cast<std::int64_t>(list.size());
    if (pool && pool->workers() > 1 && count > 0) {
      std::vector<double> part(static_cast<std::size_t>(pool->workers()), 0.0);
      const std::int64_t chunk = (count + pool->workers() - 1) / pool->workers();
      pool->parallel_for(count, [&](std::int64_t b, std::int64_t e) {
        part[static_cast<std::size_t>(b / chunk)] = scan_full(list, b, e);
      });
      for (double w : part) worst = std::max(worst, w);
    } else {
      worst = std::max(worst, scan_full(list, 0, count));
    }
    const auto& plist = plan.partial[p];
    const auto& pmask = plan.partial_mask[p];
    for (std::size_t j = 0; j < plist.size(); ++j) {
      const std::int64_t i = plist[j];
      double sum = 0.0;
      int m = 0;
      for (int k = 0; k < nn; ++k) {
        if (pmask[j] & (1u << k)) {
          sum += v[i + plan.strides[k]];
          ++m;
        }
      }
      worst = std::max(worst, std::abs(sum - m * v[i]));
    }
  }
  return worst * inv_eps2;
}

}  // namespace

double laplace_residual(const LatticeField& u, bool reflect_faces) {
  const LaplacePlan plan(u.domain(), reflect_faces);
  return plan_residual(u, plan, nullptr);
}

SolveStats solve_laplace(LatticeField& u, bool reflect_faces, double tol,
                         const EllipticOptions& opts, WorkerPool* pool) {
  const LatticeDomain& dom = u.domain();
  if (!(tol > 0.0)) throw std::invalid_argument("elliptic tolerance must be positive");

  const double omega = opts.method == EllipticOptions::Method::ConvexSweeps
                           ? 1.0
                           : (opts.omega > 0.0 ? opts.omega : auto_omega(dom, reflect_faces));
  const bool plain_average = omega == 1.0;

  const LaplacePlan plan(dom, reflect_faces);
  double* v = u.values().data();
  const int nn = plan.n_neighbors;
  const double inv_nn = 1.0 / static_cast<double>(nn);

  auto pass_full = [&](const std::vector<std::int64_t>& list, std::int64_t b, std::int64_t e) {
    if (plain_average) {
      for (std::int64_t j = b; j < e; ++j) {
        const std::int64_t i = list[j];
        double sum = 0.0;
        for (int k = 0; k < nn; ++k) sum += v[i + plan.strides[k]];
        v[i] = sum * inv_nn;
      }
    } else {
      for (std::int64_t j = b; j < e; ++j) {
        const std::int64_t i = list[j];
        double sum = 0.0;
        for (int k = 0; k < nn; ++k) sum += v[i + plan.strides[k]];
        v[i] += omega * (sum * inv_nn - v[i]);
      }
    }
  };

  auto pass_partial = [&](int p) {
    const auto& list = plan.partial[p];
    const auto& masks = plan.partial_mask[p];
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::int64_t i = list[j];
      double sum = 0.0;
      int m = 0;
      for (int k = 0; k < nn; ++k) {
        if (masks[j] & (1u << k)) {
          sum += v[i + plan.strides[k]];
          ++m;
        }
      }
      const double avg = sum / static_cast<double>(m);
      if (plain_average) {
        v[i] = avg;
      } else {
        v[i] += omega * (avg - v[i]);
      }
    }
  };

  auto color_pass = [&](int p) {
    const auto& list = plan.full[p];
    const auto count = static_cast<std::int64_t>(list.size());
    if (pool && pool->workers() > 1) {
      // Within one color every update reads only the other color, so chunked
      // parallel execution is bitwise identical to the sequential pass.
      pool->parallel_for(count, [&](std::int64_t b, std::int64_t e) { pass_full(list, b, e); });
    } else {
      pass_full(list, 0, count);
    }
    pass_partial(p);
  };

  SolveStats stats;
  stats.residual = plan_residual(u, plan, pool);
  if (stats.residual <= tol) return stats;

  for (std::int64_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    color_pass(0);
    color_pass(1);
    stats.sweeps = sweep + 1;
    if ((sweep + 1) % opts.residual_check_every == 0 || sweep + 1 == opts.max_sweeps) {
      stats.residual = plan_residual(u, plan, pool);
      if (stats.residual <= tol) return stats;
    }
  }
  throw SolveError("elliptic solve did not reach tolerance " + std::to_string(tol) +
                       " within " + std::to_string(opts.max_sweeps) +
                       " sweeps; last residual " + std::to_string(stats.residual),
                   stats.residual);
}

LatticeField discrete_extension(const BoundaryField& g, TruncationClosure closure, double tol,
                                const std::function<double(std::span<const double>)>& face_values,
                                const EllipticOptions& opts, WorkerPool* pool) {
  const DomainPtr dom = g.domain_ptr();
  const int n = dom->dim();
  const bool reflect = closure == TruncationClosure::ZeroNormalDifference;
  if (!reflect && !face_values) {
    throw std::invalid_argument("DirichletFromKernel closure needs face values");
  }

  LatticeField u(dom, g.time());

  // Dirichlet data: the whole boundary plane, plus the truncation faces
  // above it unless they reflect.
  double data_sum = 0.0;
  std::int64_t data_count = 0;
  for (std::int64_t i = 0; i < dom->plane_size(); ++i) {
    u[i] = g[i];
    data_sum += g[i];
    ++data_count;
  }
  if (!reflect) {
    std::array<double, kMaxDim> pos{};
    for (std::int64_t i = dom->plane_size(); i < dom->site_count(); ++i) {
      const Coord c = dom->coord(i);
      if (dom->classify(c) != SiteClass::Face) continue;
      dom->position(c, std::span<double>(pos.data(), n));
      u[i] = face_values(std::span<const double>(pos.data(), n));
      data_sum += u[i];
      ++data_count;
    }
  }

  // Warm start inside the data range keeps every sweep iterate there too.
  const double mean = data_sum / static_cast<double>(data_count);
  for (std::int64_t i = dom->plane_size(); i < dom->site_count(); ++i) {
    const Coord c = dom->coord(i);
    if (detail::is_unknown(*dom, c, reflect)) u[i] = mean;
  }

  solve_laplace(u, reflect, tol, opts, pool);
  return u;
}

}  // namespace fklab
