#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fklab/field_io.hpp"
#include "fklab/lattice.hpp"

using namespace fklab;

namespace {

// Fills a field from a function of the physical coordinates.
template <typename Fn>
LatticeField fill(const DomainPtr& dom, Fn&& fn) {
  LatticeField f(dom);
  std::array<double, kMaxDim> pos{};
  for (std::int64_t i = 0; i < dom->site_count(); ++i) {
    dom->position(dom->coord(i), std::span<double>(pos.data(), dom->dim()));
    f[i] = fn(std::span<const double>(pos.data(), dom->dim()));
  }
  return f;
}

double sq_norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

TEST_CASE("domain site counts") {
  CHECK(make_domain(1, 0.5, 0, 8).site_count() == 9);
  CHECK(make_domain(1, 0.5, 0, 8).plane_size() == 1);
  CHECK(make_domain(2, 0.25, 4, 3).site_count() == 36);
  CHECK(make_domain(3, 1.0, 2, 2).site_count() == 75);
}

TEST_CASE("domain preconditions and budget") {
  CHECK_THROWS_AS(make_domain(0, 1.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_domain(2, 0.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_domain(2, 1.0, 1, 0), std::invalid_argument);
  // site count above the budget is rejected and the message carries a count
  try {
    make_domain(3, 0.01, 4000, 100, 1000000);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("offset and coord round trip") {
  const auto dom = make_domain_ptr(3, 0.5, 3, 4);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) {
    CHECK(dom->offset(dom->coord(i)) == i);
  }
  // boundary plane occupies the leading offsets
  for (std::int64_t i = 0; i < dom->plane_size(); ++i) {
    CHECK(dom->coord(i)[2] == 0);
  }
}

TEST_CASE("discrete laplacian on constants, linears, quadratics") {
  for (int n : {1, 2, 3}) {
    for (double eps : {1.0, 0.5, 0.25}) {
      const auto dom = make_domain_ptr(n, eps, n == 1 ? 0 : 3, 4);
      const LatticeField constant = fill(dom, [](auto) { return 7.5; });
      const LatticeField linear = fill(dom, [](std::span<const double> x) { return x[0]; });
      const LatticeField quad = fill(dom, [](std::span<const double> x) { return sq_norm(x); });

      Coord site{};
      site[n - 1] = 2;  // interior layer, laterally centered
      CHECK(std::abs(discrete_laplacian(constant, site)) <= 1e-15);
      CHECK(std::abs(discrete_laplacian(linear, site)) <= 1e-12);
      CHECK(std::abs(discrete_laplacian(quad, site) - 2.0 * n) <= 1e-12);
    }
  }
}

TEST_CASE("laplacian contract violations") {
  const auto dom = make_domain_ptr(2, 0.5, 3, 4);
  const LatticeField f(dom);
  CHECK_THROWS_AS(discrete_laplacian(f, Coord{0, 0, 0, 0}), std::invalid_argument);  // boundary
  CHECK_THROWS_AS(discrete_laplacian(f, Coord{3, 2, 0, 0}), std::invalid_argument);  // lateral face
  CHECK_THROWS_AS(discrete_laplacian(f, Coord{0, 4, 0, 0}), std::invalid_argument);  // top face
}

TEST_CASE("boundary operator examples") {
  // x_n -> 1 for every n and eps; x_1 -> 0 by lateral cancellation
  for (int n : {1, 2, 3}) {
    for (double eps : {1.0, 0.5, 0.25}) {
      const auto dom = make_domain_ptr(n, eps, n == 1 ? 0 : 3, 3);
      const LatticeField xn = fill(dom, [n](std::span<const double> x) { return x[n - 1]; });
      Coord site{};
      CHECK(std::abs(discrete_boundary_operator(xn, site) - 1.0) <= 1e-12);
      if (n >= 2) {
        const LatticeField x1 = fill(dom, [](std::span<const double> x) { return x[0]; });
        CHECK(std::abs(discrete_boundary_operator(x1, site)) <= 1e-12);
      }
    }
  }
  // direct stencil evaluation: n=2, eps=0.5, f = x_1^2 at the origin
  const auto dom = make_domain_ptr(2, 0.5, 3, 3);
  const LatticeField x1sq = fill(dom, [](std::span<const double> x) { return x[0] * x[0]; });
  CHECK(discrete_boundary_operator(x1sq, Coord{0, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(discrete_boundary_operator(x1sq, Coord{0, 1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(discrete_boundary_operator(x1sq, Coord{3, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("laplacian linearity and lateral symmetry") {
  const auto dom = make_domain_ptr(3, 0.5, 2, 3);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  LatticeField f(dom), g(dom);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) {
    f[i] = uni(rng);
    g[i] = uni(rng);
  }
  const double alpha = 0.7315;
  LatticeField combo(dom);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) combo[i] = alpha * f[i] + g[i];

  for (std::int64_t i = 0; i < dom->site_count(); ++i) {
    const Coord c = dom->coord(i);
    if (dom->classify(c) != SiteClass::Interior) continue;
    const double want = alpha * discrete_laplacian(f, c) + discrete_laplacian(g, c);
    const double got = discrete_laplacian(combo, c);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }

  // permutation of the two lateral axes and reflection of one of them
  LatticeField swapped(dom), reflected(dom);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) {
    const Coord c = dom->coord(i);
    swapped[dom->offset(Coord{c[1], c[0], c[2], 0})] = f[i];
    reflected[dom->offset(Coord{-c[0], c[1], c[2], 0})] = f[i];
  }
  const Coord probe{1, -1, 2, 0};
  const Coord probe_swapped{-1, 1, 2, 0};
  const Coord probe_reflected{-1, -1, 2, 0};
  CHECK(discrete_laplacian(swapped, probe_swapped) ==
        doctest::Approx(discrete_laplacian(f, probe)).epsilon(1e-15));
  CHECK(discrete_laplacian(reflected, probe_reflected) ==
        doctest::Approx(discrete_laplacian(f, probe)).epsilon(1e-15));
}

TEST_CASE("restriction") {
  const auto fine = make_domain_ptr(1, 0.25, 0, 8);
  const auto coarse = make_domain_ptr(1, 0.5, 0, 4);

  SUBCASE("identity") {
    const LatticeField f = fill(fine, [](std::span<const double> x) { return std::sin(x[0]); });
    const LatticeField r = restrict_to(f, fine);
    for (std::int64_t i = 0; i < fine->site_count(); ++i) CHECK(r[i] == f[i]);
  }

  SUBCASE("injection of x_n") {
    const LatticeField f = fill(fine, [](std::span<const double> x) { return x[0]; });
    const LatticeField r = restrict_to(f, coarse);
    for (std::int64_t i = 0; i < coarse->site_count(); ++i) {
      CHECK(r[i] == 0.5 * static_cast<double>(i));
    }
  }

  SUBCASE("random field lands on the right fine sites") {
    const auto tiny = make_domain_ptr(1, 0.5, 0, 1);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    LatticeField f(fine);
    for (std::int64_t i = 0; i < fine->site_count(); ++i) f[i] = uni(rng);
    const LatticeField r = restrict_to(f, tiny);
    CHECK(r[0] == f[0]);
    CHECK(r[1] == f[2]);
  }

  SUBCASE("non nested lattices rejected") {
    const auto odd = make_domain_ptr(1, 0.75, 0, 2);
    const LatticeField f = fill(fine, [](auto) { return 1.0; });
    CHECK_THROWS_AS(restrict_to(f, odd), std::invalid_argument);
    const auto too_tall = make_domain_ptr(1, 0.5, 0, 16);
    CHECK_THROWS_AS(restrict_to(f, too_tall), std::invalid_argument);
  }

  SUBCASE("restriction of grid samples is bit exact") {
    auto smooth = [](std::span<const double> x) { return std::sin(1.3 * x[0]) + 0.2 * x[0]; };
    const LatticeField f = fill(fine, smooth);
    const LatticeField r = restrict_to(f, coarse);
    const LatticeField direct = fill(coarse, smooth);
    for (std::int64_t i = 0; i < coarse->site_count(); ++i) CHECK(r[i] == direct[i]);
  }
}

TEST_CASE("sup_error") {
  const auto dom = make_domain_ptr(2, 0.25, 8, 8);
  const Window w{1.0, 1.0, 0.0, 1.0};

  SUBCASE("identical fields") {
    const LatticeField a = fill(dom, [](std::span<const double> x) { return std::cos(x[0]); });
    CHECK(sup_error(a, a, w) == 0.0);
  }

  SUBCASE("constant gap") {
    const LatticeField a = fill(dom, [](auto) { return 0.3; });
    const LatticeField b = fill(dom, [](auto) { return 0.0; });
    CHECK(sup_error(a, b, w) == doctest::Approx(0.3).epsilon(1e-15));
  }

  SUBCASE("max over the window box") {
    const LatticeField a = fill(dom, [](std::span<const double> x) { return x[1]; });
    const LatticeField b = fill(dom, [](auto) { return 0.0; });
    CHECK(sup_error(a, b, w) == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("window must stay inside the domain") {
    const LatticeField a(dom);
    CHECK_THROWS_AS(sup_error(a, a, Window{2.0, 1.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(sup_error(a, a, Window{1.0, 2.0, 0.0, 1.0}), std::invalid_argument);
  }

  SUBCASE("empty time window signals an empty comparison set") {
    LatticeField a(dom);
    a.set_time(5.0);
    LatticeField b = a;
    CHECK_THROWS_AS(sup_error(a, b, w), EmptyWindowError);
  }

  SUBCASE("shrinking the window never grows the error") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    LatticeField a(dom), b(dom);
    for (std::int64_t i = 0; i < dom->site_count(); ++i) {
      a[i] = uni(rng);
      b[i] = uni(rng);
    }
    const double big = sup_error(a, b, Window{1.5, 1.5, 0.0, 1.0});
    const double small = sup_error(a, b, Window{0.75, 0.75, 0.0, 1.0});
    CHECK(small <= big);
  }
}

TEST_CASE("field serialization round trips") {
  const auto dom = make_domain_ptr(2, 0.3, 2, 3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  LatticeField f(dom, 0.625);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) f[i] = uni(rng);

  const auto tmp = std::filesystem::temp_directory_path();
  const auto csv = tmp / "fklab_test_field.csv";
  const auto bin = tmp / "fklab_test_field.bin";

  save_field_csv(f, csv);
  const LatticeField fc = load_field_csv(csv);
  CHECK(fc.domain().same_geometry(*dom));
  CHECK(fc.time() == f.time());
  for (std::int64_t i = 0; i < dom->site_count(); ++i) CHECK(fc[i] == f[i]);

  save_field_binary(f, bin);
  const LatticeField fb = load_field_binary(bin);
  for (std::int64_t i = 0; i < dom->site_count(); ++i) CHECK(fb[i] == f[i]);

  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}
