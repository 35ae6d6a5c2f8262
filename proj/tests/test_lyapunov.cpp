#include <numbers>

#include "eulerspec/lyapunov.hpp"
#include "support.hpp"

using namespace eulerspec;
using namespace eulerspec::lyapunov;
using fields::preset;

TEST_CASE("exponent_at") {
  CHECK(std::abs(exponent_at(preset("rigid"), {0.3, 0.2}, 20.0).value) < 1e-12);
  auto saddle = exponent_at(preset("cellular"), {0, 0}, 20.0);
  CHECK(saddle.value == doctest::Approx(1.0).epsilon(1e-6));
  // The trace is recorded at increasing times.
  for (std::size_t i = 1; i < saddle.trace.size(); ++i) CHECK(saddle.trace[i].first > saddle.trace[i - 1].first);
  for (double x2 : {0.2, 1.0, 2.9}) CHECK(exponent_at(preset("shear"), {0.5, x2}, 50.0).value <= 0.05);
}

TEST_CASE("least squares slope") {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  CHECK(fit_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("stagnation exponents") {
  auto c = stagnation_exponents(preset("cellular"));
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c[1] == 0.0);
  CHECK(c[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stagnation_exponents(preset("rigid")).empty());
  auto s = stagnation_exponents(preset("shear"));
  REQUIRE(s.size() == 1);
  CHECK(s[0] == 0.0);
}

TEST_CASE("global exponent on a coarse grid") {
  auto g = global_exponent(preset("cellular"), 10.0, 16);
  CHECK(g.has_stagnation);
  CHECK(g.stagnation_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.grid_value <= 1.0 + 1e-6);
  CHECK(g.value >= g.grid_value);
  CHECK(global_exponent(preset("rigid"), 10.0, 16).value == doctest::Approx(0.0));
  // Stagnation exponents lie in [-Lambda, Lambda].
  for (double e : stagnation_exponents(preset("cellular"))) CHECK(std::abs(e) <= g.value + 1e-10);
}

TEST_CASE("bicharacteristic amplitude system") {
  SUBCASE("rigid flow keeps xi and b") {
    auto tr = bas_trajectory(preset("rigid"), {0.1, 0.2}, {0.6, 0.8}, {-0.8, 0.6}, 10.0);
    CHECK((tr.samples.back().xi - Vec2(0.6, 0.8)).norm() < 1e-14);
    CHECK((tr.samples.back().b - Vec2(-0.8, 0.6)).norm() < 1e-14);
    CHECK(tr.first_integral_drift < 1e-14);
  }
  SUBCASE("closed form at the saddle") {
    auto tr = bas_trajectory(preset("cellular"), {0, 0}, {0, 1}, {1, 0}, 20.0);
    const auto& last = tr.samples.back();
    CHECK(last.xi.y() == doctest::Approx(std::exp(-20.0)).epsilon(1e-8));
    CHECK(last.b.x() == doctest::Approx(std::exp(20.0)).epsilon(1e-8));
    CHECK(tr.first_integral_drift <= 1e-6);
    CHECK(tr.renormalizations > 0);
  }
  SUBCASE("generic points conserve |b||xi| and orthogonality") {
    for (int i = 0; i < 5; ++i) {
      Vec2 x = testsupport::random_point();
      double th = testsupport::uniform(0, kTwoPi);
      Vec2 xi(std::cos(th), std::sin(th));
      auto tr = bas_trajectory(preset("cellular"), x, xi, perp(xi), 20.0);
      CHECK(tr.first_integral_drift <= 1e-6);
      const auto& s = tr.samples.back();
      CHECK(std::abs(s.xi.normalized().dot(s.b.normalized())) < 1e-6);
    }
  }
  SUBCASE("precondition") {
    CHECK_THROWS_AS(bas_trajectory(preset("cellular"), {0, 0}, {1, 0}, {1, 0}, 1.0), Error);
  }
}

TEST_CASE("xi-cocycle is area preserving") {
  // Fundamental matrix of xi' = -Du^T xi from two unit initial vectors.
  auto u = preset("cellular");
  Vec2 x(0.7, 1.3);
  auto a = bas_trajectory(u, x, {1, 0}, {0, 1}, 8.0);
  auto b = bas_trajectory(u, x, {0, 1}, {-1, 0}, 8.0);
  Mat2 F;
  F.col(0) = a.samples.back().xi;
  F.col(1) = b.samples.back().xi;
  CHECK(F.determinant() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("BAS exponents") {
  BasSampleSpec spec;
  spec.count = 12;
  auto mu = bas_max_exponent(preset("cellular"), spec, 15.0);
  CHECK(mu.value == doctest::Approx(1.0).epsilon(0.05));
  auto mu0 = weighted_b_exponent(preset("cellular"), 0, spec, 15.0);
  CHECK(mu0.value == mu.value);
  auto mu1 = weighted_b_exponent(preset("cellular"), 1, spec, 15.0);
  CHECK(mu1.value >= mu.value - 0.05);
  CHECK(mu1.value <= 2.0 * 1.0 + 0.1);
  CHECK(std::abs(bas_max_exponent(preset("rigid"), spec, 15.0).value) < 1e-12);
  CHECK(std::abs(weighted_b_exponent(preset("rigid"), 3, spec, 15.0).value) < 1e-12);
  CHECK(bas_max_exponent(preset("shear"), spec, 15.0).value <= 0.05);
}

TEST_CASE("higher differential growth") {
  auto cell = preset("cellular");
  auto h1 = higher_norm_growth(cell, 1, 10.0, 16);
  auto g = global_exponent(cell, 10.0, 16);
  CHECK(h1.value == doctest::Approx(g.grid_value).epsilon(1e-12));
  auto h2 = higher_norm_growth(cell, 2, 10.0, 16);
  CHECK(h2.value <= 2.0 * g.value + 0.1);
  auto r2 = higher_norm_growth(preset("rigid"), 2, 10.0, 16);
  CHECK(r2.vanishing);
  CHECK(r2.value == 0.0);
}

TEST_CASE("kernels: serial and parallel agree") {
  auto u = preset("cellular");
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(testsupport::random_point());
  flow::StepControl sc;
  auto a = kernels::log_norm_at(u, pts, {2.0, 4.0}, 0.5, sc, kernels::Exec::Serial);
  auto b = kernels::log_norm_at(u, pts, {2.0, 4.0}, 0.5, sc, kernels::Exec::Parallel);
  CHECK(a == b);
  // Re-orthonormalized norm against the plain tangent integration.
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(a[2 * i + 1] == doctest::Approx(std::log(spectral_norm(flow::tangent_flow(u, pts[i], 4.0).M))).epsilon(1e-9));
  auto c = kernels::log_second_norm_at(u, pts, {3.0}, sc, kernels::Exec::Serial);
  auto d = kernels::log_second_norm_at(u, pts, {3.0}, sc, kernels::Exec::Parallel);
  CHECK(c == d);
}
