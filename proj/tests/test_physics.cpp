#include <doctest.h>

#include <cmath>

#include "fklab/harmonic.hpp"
#include "fklab/physics.hpp"

using namespace fklab;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

TEST_CASE("cosine potential") {
  const double amp = 0.37;
  const PeriodicPotential w = cosine_potential(amp);

  SUBCASE("pinned values") {
    CHECK(w.value(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(w.value(1.0)) <= 1e-12);
    CHECK(w.value(0.5) == doctest::Approx(2.0 * amp).epsilon(1e-14));
    CHECK(w.value(0.25) == doctest::Approx(amp).epsilon(1e-14));
    CHECK(w.derivative(0.25) == doctest::Approx(kTwoPi * amp).epsilon(1e-14));
  }

  SUBCASE("periodicity, evenness, and zeros on the integers") {
    for (int i = 0; i <= 200; ++i) {
      const double a = -3.0 + 0.03 * i;
      CHECK(std::abs(w.value(a + 1.0) - w.value(a)) <= 1e-12);
      CHECK(std::abs(w.value(-a) - w.value(a)) <= 1e-12);
    }
    for (int k = -3; k <= 3; ++k) CHECK(std::abs(w.value(k)) <= 1e-12);
    for (int i = 1; i < 20; ++i) CHECK(w.value(0.05 * i - (i == 10 ? 0.001 : 0.0)) > 0.0);
  }

  SUBCASE("rejects nonpositive amplitude") {
    CHECK_THROWS_AS(cosine_potential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(cosine_potential(-1.0), std::invalid_argument);
  }
}

TEST_CASE("effective nonlinearity") {
  const double amp = 1.0 / (4.0 * kPi * kPi);
  const PeriodicPotential w = cosine_potential(amp);

  SUBCASE("zero stress, zero spacing") {
    const Nonlinearity F = effective_nonlinearity(w, 0.0, 0.0);
    CHECK(std::abs(F(0.0)) <= 1e-15);
    // F(a) = -sin(4 pi a) / (2 pi) for this amplitude
    CHECK(F(0.125) == doctest::Approx(-1.0 / kTwoPi).epsilon(1e-13));
  }

  SUBCASE("stress shifts the force") {
    const Nonlinearity F = effective_nonlinearity(w, 0.1, 0.0);
    CHECK(F(0.0) == doctest::Approx(0.1).epsilon(1e-14));
  }

  SUBCASE("frozen regression value at sigma 0.1, eps 0.5, a 0.2") {
    const Nonlinearity F = effective_nonlinearity(w, 0.1, 0.5);
    // direct formula evaluation: sigma - W'(2a + eps sigma)
    const double oracle = 0.1 - std::sin(kTwoPi * 0.45) / kTwoPi;
    CHECK(F(0.2) == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(F(0.2) == doctest::Approx(0.05081841784582669).epsilon(1e-13));
  }

  SUBCASE("family converges to the limit with the Lipschitz rate") {
    const double sigma = 0.35;
    const Nonlinearity F0 = effective_nonlinearity(w, sigma, 0.0);
    for (double eps : {0.5, 0.25, 0.1}) {
      const Nonlinearity Fe = effective_nonlinearity(w, sigma, eps);
      double worst = 0.0;
      for (int i = 0; i <= 400; ++i) {
        const double a = -2.0 + 0.01 * i;
        worst = std::max(worst, std::abs(Fe(a) - F0(a)));
      }
      CHECK(worst <= w.sup_d2 * std::abs(sigma) * eps + 1e-12);
    }
  }

  SUBCASE("certified bounds dominate dense sampling") {
    for (const Nonlinearity& F :
         {effective_nonlinearity(w, 0.2, 0.3), sine_nonlinearity(), constant_nonlinearity(1.0)}) {
      double worst_f = 0.0, worst_df = 0.0;
      for (int i = 0; i <= 20000; ++i) {
        const double a = -10.0 + 0.001 * i;
        worst_f = std::max(worst_f, std::abs(F(a)));
        worst_df = std::max(worst_df, std::abs(F.df(a)));
      }
      CHECK(worst_f <= F.sup_f + 1e-12);
      CHECK(worst_df <= F.sup_df + 1e-12);
    }
  }
}

TEST_CASE("sine nonlinearity used by the scalar reduction") {
  const Nonlinearity F = sine_nonlinearity();
  CHECK(F(0.25) == doctest::Approx(-1.0 / kTwoPi).epsilon(1e-15));
  CHECK(F(0.0) == 0.0);
  CHECK(F.sup_f == doctest::Approx(1.0 / kTwoPi));
  CHECK(F.sup_df == 1.0);
}

TEST_CASE("dislocation profiles") {
  SUBCASE("screw values and limits") {
    const BoundaryProfile p = dislocation_profile(DislocationKind::Screw, 1.0, 2);
    CHECK(p.eval_axis(0.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p.eval_axis(1.0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(p.limit_minus() == 0.0);
    CHECK(p.limit_plus() == 0.5);
    CHECK(p.eval_axis(1e6) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(p.eval_axis(-1e6) == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("monotone along the axis with range inside (0, 1/2)") {
    const BoundaryProfile p = dislocation_profile(DislocationKind::Screw, 0.7, 2);
    double prev = p.eval_axis(-1e6);
    for (int i = -60; i <= 60; ++i) {
      const double v = p.eval_axis(0.25 * i);
      CHECK(v >= prev);
      CHECK(v > 0.0);
      CHECK(v < 0.5);
      prev = v;
    }
  }

  SUBCASE("edge needs a second lateral axis") {
    CHECK_THROWS_AS(dislocation_profile(DislocationKind::Edge, 1.0, 2), std::invalid_argument);
    const BoundaryProfile p = dislocation_profile(DislocationKind::Edge, 1.0, 3);
    CHECK(p.axis() == 1);
    const std::array<double, 2> z{5.0, 0.0};
    CHECK(p.eval(std::span<const double>(z.data(), 2)) ==
          doctest::Approx(0.25).epsilon(1e-15));  // constant along axis 0
  }

  SUBCASE("invalid width") {
    CHECK_THROWS_AS(dislocation_profile(DislocationKind::Screw, 0.0, 2), std::invalid_argument);
  }
}

TEST_CASE("profile derivative bounds dominate sampled differences") {
  const BoundaryProfile p = BoundaryProfile::arctan(1.0, 0.8);
  const double step = 1e-4;
  double worst1 = 0.0, worst2 = 0.0;
  for (int i = -300; i <= 300; ++i) {
    const double s = 0.05 * i;
    const double d1 = (p.eval_axis(s + step) - p.eval_axis(s - step)) / (2 * step);
    const double d2 =
        (p.eval_axis(s + step) - 2 * p.eval_axis(s) + p.eval_axis(s - step)) / (step * step);
    worst1 = std::max(worst1, std::abs(d1));
    worst2 = std::max(worst2, std::abs(d2));
  }
  CHECK(worst1 <= p.sup_d1() + 1e-8);
  CHECK(worst2 <= p.sup_d2() + 1e-6);
}

TEST_CASE("extend_initial_data") {
  const KernelQuadrature q{64.0, 8192, true, true, 1e-6};

  SUBCASE("constant data extends to the constant field") {
    const auto dom = make_domain_ptr(2, 0.5, 4, 4);
    const InitialData init = extend_initial_data(BoundaryProfile::constant(1.5), dom, 1.0, q);
    REQUIRE(init.full.has_value());
    CHECK_FALSE(init.boundary.has_value());
    for (std::int64_t i = 0; i < dom->site_count(); ++i) {
      CHECK(std::abs((*init.full)[i] - 1.5) <= 1e-9);
    }
  }

  SUBCASE("beta 0 keeps data on the boundary plane only") {
    const auto dom = make_domain_ptr(2, 0.5, 4, 4);
    const BoundaryProfile p = dislocation_profile(DislocationKind::Screw, 1.0, 2);
    const InitialData init = extend_initial_data(p, dom, 0.0, q);
    REQUIRE(init.boundary.has_value());
    CHECK_FALSE(init.full.has_value());
    for (std::int64_t i = 0; i < dom->plane_size(); ++i) {
      const Coord c = dom->coord(i);
      CHECK((*init.boundary)[i] ==
            doctest::Approx(p.eval_axis(0.5 * static_cast<double>(c[0]))).epsilon(1e-15));
    }
  }

  SUBCASE("bulk values match the closed form above the transition") {
    const auto dom = make_domain_ptr(2, 0.5, 8, 4);
    const BoundaryProfile p = BoundaryProfile::arctan(1.0, 1.0);
    const InitialData init = extend_initial_data(p, dom, 2.0, q);
    REQUIRE(init.full.has_value());
    const double got = (*init.full)[dom->offset(Coord{0, 1, 0, 0})];
    CHECK(got == doctest::Approx(0.5).epsilon(1e-7));  // odd symmetry at x' = 0
    const double off_axis = (*init.full)[dom->offset(Coord{2, 1, 0, 0})];
    CHECK(off_axis == doctest::Approx(0.5 + std::atan(1.0 / 1.5) / kPi).epsilon(1e-4));
  }
}
