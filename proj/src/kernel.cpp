#include "fklab/harmonic.hpp"

#include <cmath>

#include "fklab/parallel.hpp"

namespace fklab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Measure of the unit (n-1)-sphere in R^n.
double sphere_measure(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

// Kernel along one lateral coordinate (the n = 2 kernel); all axis-aligned
// profiles reduce to it.
double kernel_1d(double w, double h) { return h / (kPi * (h * h + w * w)); }

// Mass of the 1d kernel centered at xa over (R, +inf) resp. (-inf, -R).
double right_tail_mass(double xa, double h, double R) {
  return (0.5 * kPi - std::atan((R - xa) / h)) / kPi;
}
double left_tail_mass(double xa, double h, double R) {
  return (0.5 * kPi - std::atan((R + xa) / h)) / kPi;
}

// Panel grid along the profile axis with cached boundary values; reused
// across evaluation points.
struct LineGrid {
  double R = 0.0;
  std::int64_t coarse = 0;
  double dz_c = 0.0, dz_f = 0.0;
  std::vector<double> g_c, g_f;

  LineGrid(const BoundaryProfile& u0, const KernelQuadrature& q) {
    R = q.radius;
    coarse = q.panels;
    dz_c = 2.0 * R / static_cast<double>(coarse);
    dz_f = 0.5 * dz_c;
    g_c.resize(coarse);
    g_f.resize(2 * coarse);
    for (std::int64_t j = 0; j < coarse; ++j) {
      g_c[j] = u0.eval_axis(-R + (static_cast<double>(j) + 0.5) * dz_c);
    }
    for (std::int64_t j = 0; j < 2 * coarse; ++j) {
      g_f[j] = u0.eval_axis(-R + (static_cast<double>(j) + 0.5) * dz_f);
    }
  }

  ExtensionValue eval(const BoundaryProfile& u0, double xa, double h,
                      const KernelQuadrature& q) const {
    double ic = 0.0;
    for (std::int64_t j = 0; j < coarse; ++j) {
      const double z = -R + (static_cast<double>(j) + 0.5) * dz_c;
      ic += kernel_1d(xa - z, h) * g_c[j];
    }
    ic *= dz_c;
    double iff = 0.0;
    for (std::int64_t j = 0; j < 2 * coarse; ++j) {
      const double z = -R + (static_cast<double>(j) + 0.5) * dz_f;
      iff += kernel_1d(xa - z, h) * g_f[j];
    }
    iff *= dz_f;

    ExtensionValue out;
    out.value = q.richardson ? (4.0 * iff - ic) / 3.0 : iff;
    out.error_estimate = std::abs(iff - ic);

    const double mr = right_tail_mass(xa, h, R);
    const double ml = left_tail_mass(xa, h, R);
    if (q.tail_correction) {
      out.value += u0.limit_plus() * mr + u0.limit_minus() * ml;
      out.error_estimate += u0.far_deviation(R) * (mr + ml);
    } else {
      out.error_estimate +=
          std::abs(u0.limit_plus()) * mr + std::abs(u0.limit_minus()) * ml;
    }
    out.flagged = out.error_estimate > q.tol;
    return out;
  }
};

}  // namespace

void KernelQuadrature::validate(double max_eval_height) const {
  if (panels < 8) throw std::invalid_argument("quadrature needs at least 8 panels per axis");
  if (radius < 8.0 * max_eval_height) {
    throw std::invalid_argument("quadrature radius " + std::to_string(radius) +
                                " must be >= 8 x evaluation height " +
                                std::to_string(max_eval_height));
  }
}

double poisson_kernel(std::span<const double> zprime, double zn, int n) {
  if (n < 2) throw std::invalid_argument("the Poisson kernel needs n >= 2");
  if (!(zn > 0.0)) throw std::domain_error("the Poisson kernel needs z_n > 0");
  double r2 = zn * zn;
  for (double w : zprime) r2 += w * w;
  return 2.0 * zn / (sphere_measure(n) * std::pow(r2, 0.5 * n));
}

ExtensionValue continuous_extension(const BoundaryProfile& u0, std::span<const double> x, int n,
                                    const KernelQuadrature& q) {
  if (n < 1 || static_cast<int>(x.size()) < n) {
    throw std::invalid_argument("continuous_extension needs a point with n coordinates");
  }
  const double h = x[n - 1];
  if (h < 0.0) throw std::invalid_argument("continuous_extension needs x_n >= 0");
  if (n == 1 || h == 0.0) {
    // n = 1: the bounded harmonic extension of a single value is constant.
    // h = 0: the extension attains the boundary data.
    ExtensionValue out;
    out.value = u0.eval(x.first(static_cast<std::size_t>(n > 1 ? n - 1 : 0)));
    return out;
  }
  q.validate(h);
  // The profile is constant along every lateral axis but its own, so the
  // boundary integral marginalizes exactly to the profile axis.
  const int axis = u0.axis();
  if (axis > n - 2) throw std::invalid_argument("profile axis does not exist in this dimension");
  LineGrid grid(u0, q);
  return grid.eval(u0, x[axis], h, q);
}

namespace {

// Signed mass of the n = 3 kernel over the rectangle [a1,b1]x[a2,b2]
// (coordinates relative to the evaluation point), via the solid angle
// subtended by a corner rectangle.
double corner_angle(double u, double v, double h) {
  return std::atan(u * v / (h * std::sqrt(h * h + u * u + v * v)));
}

double rect_mass_3d(double a1, double b1, double a2, double b2, double h) {
  return (corner_angle(b1, b2, h) - corner_angle(b1, a2, h) - corner_angle(a1, b2, h) +
          corner_angle(a1, a2, h)) /
         (2.0 * kPi);
}

}  // namespace

ExtensionValue poisson_kernel_mass(int n, std::span<const double> xprime, double xn,
                                   const KernelQuadrature& q) {
  if (n != 2 && n != 3) {
    throw std::invalid_argument("kernel mass check is implemented for n in {2, 3}");
  }
  if (!(xn > 0.0)) throw std::domain_error("kernel mass check needs x_n > 0");
  q.validate(xn);

  if (n == 2) {
    const BoundaryProfile one = BoundaryProfile::constant(1.0);
    LineGrid grid(one, q);
    return grid.eval(one, xprime.empty() ? 0.0 : xprime[0], xn, q);
  }

  const double x1 = xprime.size() > 0 ? xprime[0] : 0.0;
  const double x2 = xprime.size() > 1 ? xprime[1] : 0.0;
  const double R = q.radius;

  auto tensor_sum = [&](std::int64_t p) {
    const double dz = 2.0 * R / static_cast<double>(p);
    double acc = 0.0;
    std::array<double, 2> w{};
    for (std::int64_t j = 0; j < p; ++j) {
      w[0] = x1 - (-R + (static_cast<double>(j) + 0.5) * dz);
      double row = 0.0;
      for (std::int64_t k = 0; k < p; ++k) {
        w[1] = x2 - (-R + (static_cast<double>(k) + 0.5) * dz);
        row += poisson_kernel(std::span<const double>(w.data(), 2), xn, 3);
      }
      acc += row;
    }
    return acc * dz * dz;
  };

  const double ic = tensor_sum(q.panels);
  const double iff = tensor_sum(2 * q.panels);

  ExtensionValue out;
  out.value = q.richardson ? (4.0 * iff - ic) / 3.0 : iff;
  out.error_estimate = std::abs(iff - ic);
  const double covered = rect_mass_3d(-R - x1, R - x1, -R - x2, R - x2, xn);
  if (q.tail_correction) {
    out.value += 1.0 - covered;
  } else {
    out.error_estimate += 1.0 - covered;
  }
  out.flagged = out.error_estimate > q.tol;
  return out;
}

LatticeField sample_continuous_extension(const BoundaryProfile& u0, const DomainPtr& dom,
                                         const KernelQuadrature& q, WorkerPool* pool) {
  const int n = dom->dim();
  LatticeField out(dom, 0.0);
  if (n == 1) {
    const double c = u0.eval_axis(0.0);
    for (std::int64_t i = 0; i < dom->site_count(); ++i) out[i] = c;
    return out;
  }
  q.validate(dom->vertical_extent());
  const LineGrid grid(u0, q);
  const int axis = u0.axis();
  if (axis > n - 2) throw std::invalid_argument("profile axis does not exist in this dimension");

  auto fill = [&](std::int64_t begin, std::int64_t end) {
    std::array<double, kMaxDim> pos{};
    for (std::int64_t i = begin; i < end; ++i) {
      const Coord c = dom->coord(i);
      dom->position(c, std::span<double>(pos.data(), n));
      if (c[n - 1] == 0) {
        out[i] = u0.eval(std::span<const double>(pos.data(), n - 1));
      } else {
        out[i] = grid.eval(u0, pos[axis], pos[n - 1], q).value;
      }
    }
  };
  if (pool) {
    pool->parallel_for(dom->site_count(), fill);
  } else {
    fill(0, dom->site_count());
  }
  return out;
}

ExtensionReport decay_report(const BoundaryProfile& u0, std::span<const double> heights,
                             const KernelQuadrature& q, double eps, int n) {
  ExtensionReport rep;
  if (n < 2) throw std::invalid_argument("decay_report needs n >= 2");

  const double w = u0.width() > 0 ? u0.width() : 1.0;
  const std::array<double, 9> laterals = {0.0, 0.5 * w, -0.5 * w, w, -w, 2 * w, -2 * w, 4 * w, -4 * w};
  const int axis = u0.axis();

  auto value_at = [&](double xa, double h) {
    std::array<double, kMaxDim> x{};
    x[axis] = xa;
    x[n - 1] = h;
    return continuous_extension(u0, std::span<const double>(x.data(), n), n, q).value;
  };

  for (double h : heights) {
    ExtensionReportRow row;
    row.height = h;
    const double step = h / 100.0;
    for (double xa : laterals) {
      const double u = value_at(xa, h);
      const double ua_p = value_at(xa + step, h), ua_m = value_at(xa - step, h);
      const double un_p = value_at(xa, h + step), un_m = value_at(xa, h - step);
      const double da = (ua_p - ua_m) / (2 * step);
      const double dn = (un_p - un_m) / (2 * step);
      const double daa = (ua_p - 2 * u + ua_m) / (step * step);
      const double dnn = (un_p - 2 * u + un_m) / (step * step);
      const double dan = (value_at(xa + step, h + step) - value_at(xa + step, h - step) -
                          value_at(xa - step, h + step) + value_at(xa - step, h - step)) /
                         (4 * step * step);
      const double grad = std::sqrt(da * da + dn * dn);
      const double hess = std::max({std::abs(daa), std::abs(dnn), std::abs(dan)});
      row.grad_product = std::max(row.grad_product, grad * (1.0 + h));
      row.hess_product = std::max(row.hess_product, hess * (1.0 + h * h));

      // Lattice operators on kernel samples; lateral axes other than the
      // profile axis contribute exactly zero.
      const double va_p = value_at(xa + eps, h), va_m = value_at(xa - eps, h);
      const double vn_p = value_at(xa, h + eps);
      const double d_eps = ((va_p - u) + (va_m - u) + (vn_p - u)) / eps;
      row.d_eps_product = std::max(row.d_eps_product, std::abs(d_eps) * (1.0 + h));
      if (h >= eps - 1e-12) {
        // full stencil stays in the closed half space
        double lap_eps = (va_p - u) + (va_m - u) + (vn_p - u);
        lap_eps += value_at(xa, std::max(0.0, h - eps)) - u;
        lap_eps /= eps * eps;
        row.lap_eps_product = std::max(row.lap_eps_product, std::abs(lap_eps) * (1.0 + h * h));
      }
    }
    rep.rows.push_back(row);
  }

  double best_g = 0, best_h = 0, best_d = 0, best_l = 0;
  for (const auto& r : rep.rows) {
    best_g = std::max(best_g, r.grad_product);
    best_h = std::max(best_h, r.hess_product);
    best_d = std::max(best_d, r.d_eps_product);
    best_l = std::max(best_l, r.lap_eps_product);
  }
  rep.fitted_grad = best_g;
  rep.fitted_hess = best_h;
  rep.fitted_d_eps = best_d;
  rep.fitted_lap_eps = best_l;
  // A product approaching its envelope from below is fine; a decay law that
  // is off by a power would at least double over a 4x height span.
  if (rep.rows.size() >= 2) {
    const auto& a = rep.rows.front();
    const auto& b = rep.rows.back();
    auto grows = [](double front, double back) { return back > 2.0 * front + 1e-6; };
    rep.growth_flag = grows(a.grad_product, b.grad_product) ||
                      grows(a.hess_product, b.hess_product) ||
                      grows(a.d_eps_product, b.d_eps_product) ||
                      grows(a.lap_eps_product, b.lap_eps_product);
  }
  return rep;
}

}  // namespace fklab
