#include <doctest.h>

#include <cmath>
#include <random>

#include "fklab/harmonic.hpp"

using namespace fklab;

namespace {
constexpr double kPi = 3.14159265358979323846;

double closed_arctan_extension(double x, double h, double width) {
  return 0.5 + std::atan(x / (width + h)) / kPi;
}
}  // namespace

TEST_CASE("poisson kernel values") {
  const std::array<double, 1> z0{0.0}, z1{1.0};
  CHECK(poisson_kernel(std::span<const double>(z0.data(), 1), 1.0, 2) ==
        doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(poisson_kernel(std::span<const double>(z1.data(), 1), 1.0, 2) ==
        doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
  const std::array<double, 2> z00{0.0, 0.0};
  CHECK(poisson_kernel(std::span<const double>(z00.data(), 2), 1.0, 3) ==
        doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));

  // strictly positive wherever defined
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const std::array<double, 2> z{uni(rng), uni(rng)};
    CHECK(poisson_kernel(std::span<const double>(z.data(), 2), 0.25 + std::abs(uni(rng)), 3) > 0.0);
  }

  CHECK_THROWS_AS(poisson_kernel(std::span<const double>(z0.data(), 1), 0.0, 2), std::domain_error);
  CHECK_THROWS_AS(poisson_kernel(std::span<const double>(z0.data(), 1), -1.0, 2),
                  std::domain_error);
  CHECK_THROWS_AS(poisson_kernel(std::span<const double>(z0.data(), 0), 1.0, 1),
                  std::invalid_argument);
}

TEST_CASE("kernel normalization within the reported estimate") {
  SUBCASE("n = 2") {
    const KernelQuadrature q{64.0, 4096, true, true, 1e-6};
    for (double h : {0.5, 1.0, 4.0}) {
      const ExtensionValue m = poisson_kernel_mass(2, {}, h, q);
      CHECK(std::abs(m.value - 1.0) <= std::max(m.error_estimate, 1e-12));
      CHECK(m.error_estimate <= 1e-6);
    }
  }
  SUBCASE("n = 3 tensor rule") {
    const KernelQuadrature q{16.0, 512, true, true, 1e-6};
    const std::array<double, 2> xp{0.3, -0.2};
    for (double h : {0.5, 1.0, 2.0}) {
      const ExtensionValue m = poisson_kernel_mass(3, std::span<const double>(xp.data(), 2), h, q);
      CHECK(std::abs(m.value - 1.0) <= std::max(m.error_estimate, 1e-12));
      CHECK(m.error_estimate <= 1e-6);
    }
  }
}

TEST_CASE("continuous extension") {
  const KernelQuadrature q{256.0, 65536, true, true, 1e-6};

  SUBCASE("constants extend to themselves") {
    const BoundaryProfile c = BoundaryProfile::constant(3.25);
    for (double h : {0.5, 2.0, 8.0}) {
      const std::array<double, 2> x{1.0, h};
      const ExtensionValue v = continuous_extension(c, std::span<const double>(x.data(), 2), 2, q);
      CHECK(std::abs(v.value - 3.25) <= 1e-9);
    }
  }

  SUBCASE("odd symmetry above the transition point") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0);
    const std::array<double, 2> x{0.0, 1.0};
    const ExtensionValue v = continuous_extension(arc, std::span<const double>(x.data(), 2), 2, q);
    CHECK(v.value == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("matches the shifted-width closed form") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0);
    const std::array<double, 2> x{1.0, 1.0};
    const ExtensionValue v = continuous_extension(arc, std::span<const double>(x.data(), 2), 2, q);
    CHECK(v.value == doctest::Approx(0.5 + std::atan(0.5) / kPi).epsilon(1e-8));

    double worst = 0.0;
    for (double h : {0.5, 1.0, 2.0, 4.0}) {
      for (double xa : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
        const std::array<double, 2> pt{xa, h};
        const ExtensionValue w =
            continuous_extension(arc, std::span<const double>(pt.data(), 2), 2, q);
        worst = std::max(worst, std::abs(w.value - closed_arctan_extension(xa, h, 1.0)));
      }
    }
    CHECK(worst <= 1e-6);
  }

  SUBCASE("n = 3 profile reduces to the axis integral") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0, 0);
    const std::array<double, 3> x{0.8, -2.0, 1.5};
    const ExtensionValue v = continuous_extension(arc, std::span<const double>(x.data(), 3), 3, q);
    CHECK(v.value == doctest::Approx(closed_arctan_extension(0.8, 1.5, 1.0)).epsilon(1e-7));
  }

  SUBCASE("n = 1 is the constant extension") {
    const BoundaryProfile c = BoundaryProfile::constant(-0.75);
    const std::array<double, 1> x{2.0};
    const ExtensionValue v = continuous_extension(c, std::span<const double>(x.data(), 1), 1, q);
    CHECK(v.value == -0.75);
  }

  SUBCASE("sup norm bounded by the data sup norm plus tolerance") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 0.5);
    for (double h : {0.25, 1.0, 3.0}) {
      for (double xa : {-5.0, -0.5, 0.0, 0.5, 5.0}) {
        const std::array<double, 2> pt{xa, h};
        const ExtensionValue v =
            continuous_extension(arc, std::span<const double>(pt.data(), 2), 2, q);
        CHECK(std::abs(v.value) <= arc.sup_value() + std::max(v.error_estimate, 1e-9));
      }
    }
  }

  SUBCASE("quadrature invariants enforced") {
    const BoundaryProfile c = BoundaryProfile::constant(1.0);
    const std::array<double, 2> x{0.0, 40.0};
    CHECK_THROWS_AS(continuous_extension(c, std::span<const double>(x.data(), 2), 2, q),
                    std::invalid_argument);  // radius < 8 * height
    const KernelQuadrature few{64.0, 4, true, true, 1e-6};
    const std::array<double, 2> y{0.0, 1.0};
    CHECK_THROWS_AS(continuous_extension(c, std::span<const double>(y.data(), 2), 2, few),
                    std::invalid_argument);  // too few panels
  }
}

TEST_CASE("discrete extension") {
  SUBCASE("n = 1 bounded harmonic is the boundary constant") {
    const auto dom = make_domain_ptr(1, 0.5, 0, 12);
    BoundaryField g(dom);
    g[0] = 2.5;
    const LatticeField u = discrete_extension(g, TruncationClosure::ZeroNormalDifference, 1e-12);
    for (std::int64_t i = 0; i < dom->site_count(); ++i) {
      CHECK(u[i] == doctest::Approx(2.5).epsilon(1e-11));
    }
  }

  SUBCASE("constant data is exact immediately") {
    const auto dom = make_domain_ptr(2, 0.5, 3, 3);
    BoundaryField g(dom, 0.0, 5.0);
    const LatticeField u = discrete_extension(g, TruncationClosure::ZeroNormalDifference, 1e-12);
    for (std::int64_t i = 0; i < dom->site_count(); ++i) CHECK(u[i] == 5.0);
  }

  SUBCASE("three-unknown strip matches the dense solve") {
    const auto dom = make_domain_ptr(2, 0.5, 2, 2);
    BoundaryField g(dom);
    for (std::int64_t i = 0; i < dom->plane_size(); ++i) {
      g[i] = 0.3 * static_cast<double>(dom->coord(i)[0]) + 0.1;
    }
    auto face = [](std::span<const double> x) { return 2.0 * x[0] - 3.0 * x[1] + 1.0; };
    const LatticeField u =
        discrete_extension(g, TruncationClosure::DirichletFromKernel, 1e-13, face);

    // unknowns a, b, c at i1 = -1, 0, 1 on layer 1:
    //   4a - b     = u(-2,1) + g(-1) + top(-1)
    //   4b - a - c = g(0) + top(0)
    //   4c - b     = u(2,1) + g(1) + top(1)
    auto gv = [&](std::int64_t i1) { return g[dom->offset(Coord{i1, 0, 0, 0})]; };
    auto fv = [&](std::int64_t i1, std::int64_t in) {
      const std::array<double, 2> x{0.5 * static_cast<double>(i1),
                                    0.5 * static_cast<double>(in)};
      return face(std::span<const double>(x.data(), 2));
    };
    const double ra = fv(-2, 1) + gv(-1) + fv(-1, 2);
    const double rb = gv(0) + fv(0, 2);
    const double rc = fv(2, 1) + gv(1) + fv(1, 2);
    // eliminate a and c: a = (ra + b)/4, c = (rc + b)/4
    const double b_exact = (rb + ra / 4.0 + rc / 4.0) / (4.0 - 0.5);
    const double a_exact = (ra + b_exact) / 4.0;
    const double c_exact = (rc + b_exact) / 4.0;

    CHECK(u[dom->offset(Coord{-1, 1, 0, 0})] == doctest::Approx(a_exact).epsilon(1e-10));
    CHECK(u[dom->offset(Coord{0, 1, 0, 0})] == doctest::Approx(b_exact).epsilon(1e-10));
    CHECK(u[dom->offset(Coord{1, 1, 0, 0})] == doctest::Approx(c_exact).epsilon(1e-10));
  }

  SUBCASE("maximum principle on randomized data") {
    const auto dom = make_domain_ptr(2, 0.5, 4, 4);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      BoundaryField g(dom);
      double lo = 1e300, hi = -1e300;
      for (std::int64_t i = 0; i < dom->plane_size(); ++i) {
        g[i] = uni(rng);
        lo = std::min(lo, g[i]);
        hi = std::max(hi, g[i]);
      }
      const LatticeField u = discrete_extension(g, TruncationClosure::ZeroNormalDifference, 1e-11);
      for (std::int64_t i = 0; i < dom->site_count(); ++i) {
        CHECK(u[i] >= lo - 1e-12);
        CHECK(u[i] <= hi + 1e-12);
      }
    }
  }

  SUBCASE("missing face data rejected") {
    const auto dom = make_domain_ptr(2, 0.5, 2, 2);
    const BoundaryField g(dom);
    CHECK_THROWS_AS(discrete_extension(g, TruncationClosure::DirichletFromKernel, 1e-10),
                    std::invalid_argument);
  }
}

TEST_CASE("lattice laplacian consistency on kernel samples") {
  // Delta^eps of the closed-form extension decays ~4x when eps halves.
  const double w = 1.0;
  auto u0c = [&](double x, double h) { return closed_arctan_extension(x, h, w); };
  auto lap_eps = [&](double eps, double x, double h) {
    return (u0c(x + eps, h) + u0c(x - eps, h) + u0c(x, h + eps) + u0c(x, h - eps) -
            4.0 * u0c(x, h)) /
           (eps * eps);
  };
  double worst_coarse = 0.0, worst_fine = 0.0;
  for (double x : {-1.0, 0.0, 0.5, 1.5}) {
    for (double h : {1.0, 2.0}) {
      worst_coarse = std::max(worst_coarse, std::abs(lap_eps(0.25, x, h)));
      worst_fine = std::max(worst_fine, std::abs(lap_eps(0.125, x, h)));
    }
  }
  CHECK(worst_fine > 0.0);
  const double ratio = worst_coarse / worst_fine;
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.5);
}

TEST_CASE("discrete extension converges to the continuous one") {
  const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0);
  const KernelQuadrature q{64.0, 16384, true, true, 1e-6};
  const Window window{1.5, 1.0, 0.0, 0.0};

  std::vector<double> errs;
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto dom = make_domain_ptr(2, eps, std::llround(4.0 / eps), std::llround(2.0 / eps));
    const LatticeField u0c = sample_continuous_extension(arc, dom, q);
    const BoundaryField g = sample_boundary(arc, dom);
    auto faces = [&u0c](std::span<const double> x) {
      Coord c{};
      for (int k = 0; k < 2; ++k) c[k] = std::llround(x[k] / u0c.domain().eps());
      return u0c[u0c.domain().offset(c)];
    };
    const LatticeField u0d =
        discrete_extension(g, TruncationClosure::DirichletFromKernel, 1e-10, faces);
    errs.push_back(sup_error(u0d, u0c, window));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    CHECK(errs[i + 1] <= 1.1 * errs[i]);
  }
  CHECK(errs.back() < errs.front());
}

TEST_CASE("decay report") {
  const KernelQuadrature q{128.0, 16384, true, true, 1e-6};

  SUBCASE("constant profiles have zero derivative products") {
    const BoundaryProfile c = BoundaryProfile::constant(4.0);
    const std::array<double, 3> heights{1.0, 2.0, 4.0};
    const ExtensionReport rep = decay_report(c, std::span<const double>(heights.data(), 3), q);
    for (const auto& row : rep.rows) {
      CHECK(std::abs(row.grad_product) <= 1e-7);
      CHECK(std::abs(row.hess_product) <= 1e-6);
      CHECK(std::abs(row.d_eps_product) <= 1e-7);
      CHECK(std::abs(row.lap_eps_product) <= 1e-6);
    }
    CHECK_FALSE(rep.growth_flag);
  }

  SUBCASE("arctan profile products stay bounded across heights") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0);
    const std::array<double, 4> heights{1.0, 2.0, 4.0, 8.0};
    const ExtensionReport rep = decay_report(arc, std::span<const double>(heights.data(), 4), q);
    CHECK_FALSE(rep.growth_flag);
    // vertical derivative of the closed form at x=1, h=1 is -1/(5 pi), so the
    // grad product at height 1 is at least 2/(5 pi); the envelope stays O(1).
    const double floor_at_1 = (1.0 / (5.0 * kPi)) * 2.0;
    CHECK(rep.rows.front().grad_product >= 0.5 * floor_at_1);
    CHECK(rep.fitted_grad <= 1.0);
    CHECK(rep.fitted_lap_eps <= 2.0);
  }

  SUBCASE("lattice operator products uniform over two eps") {
    const BoundaryProfile arc = BoundaryProfile::arctan(1.0, 1.0);
    const std::array<double, 3> heights{1.0, 2.0, 4.0};
    const ExtensionReport coarse =
        decay_report(arc, std::span<const double>(heights.data(), 3), q, 0.5);
    const ExtensionReport fine =
        decay_report(arc, std::span<const double>(heights.data(), 3), q, 0.25);
    // one constant covers both lattice spacings
    const double lap_envelope = 2.0 * std::max(coarse.fitted_lap_eps, fine.fitted_lap_eps);
    const double d_envelope = 2.0 * std::max(coarse.fitted_d_eps, fine.fitted_d_eps);
    for (const auto& rep : {coarse, fine}) {
      for (const auto& row : rep.rows) {
        CHECK(row.lap_eps_product <= lap_envelope);
        CHECK(row.d_eps_product <= d_envelope);
      }
    }
  }
}
