#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace eulerspec;
using namespace eulerspec::fields;
using testsupport::random_field;
using testsupport::random_point;

namespace {

const double pi = std::numbers::pi;
const Complex I(0.0, 1.0);

// Closed-form cellular velocity, u = (-sin x1 cos x2, cos x1 sin x2).
Vec2 cellular_exact(const Vec2& x) {
  return {-std::sin(x.x()) * std::cos(x.y()), std::cos(x.x()) * std::sin(x.y())};
}

Mat2 fd_jacobian(const TrigVelocityField& u, const Vec2& x, double h = 1e-5) {
  Mat2 J;
  for (int j = 0; j < 2; ++j) {
    Vec2 e = Vec2::Zero();
    e(j) = h;
    J.col(j) = (u.velocity(x + e) - u.velocity(x - e)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("torus reduction is idempotent and the metric is flat") {
  for (int i = 0; i < 200; ++i) {
    double a = testsupport::uniform(-50, 50);
    double r = wrap_angle(a);
    CHECK(r >= 0.0);
    CHECK(r < kTwoPi);
    CHECK(wrap_angle(r) == r);
  }
  CHECK(torus_distance(Vec2(0.1, 0.1), Vec2(kTwoPi - 0.1, 0.1)) == doctest::Approx(0.2));
  CHECK(TorusPoint(-0.5, 7.0).x1 == doctest::Approx(kTwoPi - 0.5));
}

TEST_CASE("mode box enumeration skips the zero mode") {
  ModeBox box(3);
  CHECK(box.size() == 48);
  for (std::size_t i = 0; i < box.size(); ++i) {
    ModeIndex k = box.mode(i);
    CHECK_FALSE(k.is_zero());
    CHECK(box.index(k) == i);
  }
  CHECK_THROWS_AS(FourierScalarField{box}.set({0, 0}, 1.0), Error);
}

TEST_CASE("velocity_from_stream matches symbolic differentiation") {
  SUBCASE("psi = sin x1 sin x2") {
    // sin a sin b = -(e^{i(a+b)} - e^{i(a-b)} - e^{-i(a-b)} + e^{-i(a+b)}) / 4
    std::vector<std::pair<ModeIndex, Complex>> c = {
        {{1, 1}, -0.25}, {{-1, -1}, -0.25}, {{1, -1}, 0.25}, {{-1, 1}, 0.25}};
    auto u = velocity_from_stream(FourierScalarField::from_coefficients(2, c));
    for (int i = 0; i < 50; ++i) {
      Vec2 x = random_point();
      CHECK((u.velocity(x) - cellular_exact(x)).norm() < 1e-14);
    }
  }
  SUBCASE("psi = cos x2") {
    std::vector<std::pair<ModeIndex, Complex>> c = {{{0, 1}, 0.5}, {{0, -1}, 0.5}};
    auto u = velocity_from_stream(FourierScalarField::from_coefficients(1, c));
    for (int i = 0; i < 50; ++i) {
      Vec2 x = random_point();
      CHECK((u.velocity(x) - Vec2(std::sin(x.y()), 0.0)).norm() < 1e-14);
    }
  }
  SUBCASE("psi = 0") {
    auto u = velocity_from_stream(FourierScalarField{ModeBox(2)});
    CHECK(u.velocity(random_point()).norm() == 0.0);
  }
  SUBCASE("non-real stream function is rejected") {
    std::vector<std::pair<ModeIndex, Complex>> c = {{{1, 0}, 1.0}};
    try {
      velocity_from_stream(FourierScalarField::from_coefficients(1, c));
      FAIL("expected invalid-input");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidInput);
    }
  }
}

TEST_CASE("velocity fields are divergence free with curl u = Laplacian psi") {
  for (int trial = 0; trial < 10; ++trial) {
    auto psi = random_field(3, true);
    auto u = velocity_from_stream(psi);
    for (int k1 = -3; k1 <= 3; ++k1)
      for (int k2 = -3; k2 <= 3; ++k2) {
        ModeIndex k{k1, k2};
        if (k.is_zero()) continue;
        auto uk = u.velocity_coeff(k);
        CHECK(std::abs(I * (double(k1) * uk[0] + double(k2) * uk[1])) < 1e-14);
        Complex curl_k = -I * double(k2) * uk[0] + I * double(k1) * uk[1];
        CHECK(std::abs(curl_k - (-double(k.norm2()) * psi.coeff(k))) < 1e-12);
        CHECK(std::abs(u.vorticity_coeff(k) - curl_k) < 1e-12);
      }
    // Real-valuedness: the velocity at a point has no imaginary part by
    // construction; compare against direct complex summation.
    Vec2 x = random_point();
    Complex v1{}, v2{};
    for (std::size_t i = 0; i < psi.box().size(); ++i) {
      ModeIndex k = psi.box().mode(i);
      Complex e = std::exp(I * (k.k1 * x.x() + k.k2 * x.y()));
      v1 += -I * double(k.k2) * psi.data()[i] * e;
      v2 += I * double(k.k1) * psi.data()[i] * e;
    }
    CHECK(std::abs(v1.imag()) < 1e-12);
    CHECK((u.velocity(x) - Vec2(v1.real(), v2.real())).norm() < 1e-12);
  }
}

TEST_CASE("eval returns exact jets") {
  auto cell = preset("cellular");
  auto j0 = cell.eval({0.0, 0.0}, 1);
  Mat2 saddle;
  saddle << -1, 0, 0, 1;
  CHECK(testsupport::max_abs(j0.jacobian - saddle) < 1e-15);
  auto jc = cell.eval({pi / 2, pi / 2}, 1);
  Mat2 center;
  center << 0, 1, -1, 0;
  CHECK(testsupport::max_abs(jc.jacobian - center) < 1e-15);
  auto rigid = preset("rigid");
  CHECK(testsupport::max_abs(rigid.eval(random_point(), 1).jacobian) == 0.0);
  CHECK_THROWS_AS(cell.eval({0, 0}, 3), Error);

  // Finite-difference oracle for Jacobian and Hessian on a random field.
  auto u = velocity_from_stream(random_field(3, true));
  for (int i = 0; i < 10; ++i) {
    Vec2 x = random_point();
    auto jet = u.eval(x, 2);
    CHECK(testsupport::max_abs(jet.jacobian - fd_jacobian(u, x)) < 1e-7 * (1 + jet.jacobian.norm()));
    CHECK(std::abs(jet.jacobian.trace()) < 1e-12);
    const double h = 1e-5;
    for (int l = 0; l < 2; ++l) {
      Vec2 e = Vec2::Zero();
      e(l) = h;
      Mat2 dJ = (u.eval(x + e, 1).jacobian - u.eval(x - e, 1).jacobian) / (2 * h);
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(jet.hessian[c](j, l) - dJ(c, j)) < 1e-6 * (1 + jet.hessian[c].norm()));
    }
  }
}

TEST_CASE("curl symbol") {
  ModeBox box(2);
  FourierVectorField v{FourierScalarField{box}, FourierScalarField{box}};
  v.c2.set({1, 0}, 1.0);
  auto w = curl(v);
  CHECK(std::abs(w.coeff({1, 0}) - I) < 1e-15);
  CHECK(w.l2_norm() == doctest::Approx(1.0));

  // curl of the cellular velocity is -2 sin x1 sin x2 = -2 psi.
  auto cell = preset("cellular");
  FourierVectorField cv{FourierScalarField{box}, FourierScalarField{box}};
  for (const auto& [k, c] : cell.stream()) {
    auto uk = cell.velocity_coeff(k);
    cv.c1.set(k, uk[0]);
    cv.c2.set(k, uk[1]);
  }
  auto cw = curl(cv);
  for (const auto& [k, c] : cell.stream()) CHECK(std::abs(cw.coeff(k) + 2.0 * c) < 1e-15);
  for (int i = 0; i < 20; ++i) {
    Vec2 x = random_point();
    CHECK(std::abs(cw.evaluate(x) + 2 * std::sin(x.x()) * std::sin(x.y())) < 1e-14);
  }
}

TEST_CASE("curl_inverse single modes") {
  ModeBox box(2);
  FourierScalarField w{box};
  w.set({1, 0}, 1.0);
  auto v = curl_inverse(w);
  // curl (0, -i) e^{i x1} = i * (-i) = 1.
  CHECK(std::abs(v.c1.coeff({1, 0})) < 1e-15);
  CHECK(std::abs(v.c2.coeff({1, 0}) - (-I)) < 1e-15);

  FourierScalarField w2{box};
  w2.set({1, 1}, 1.0);
  auto v2 = curl_inverse(w2);
  CHECK(std::abs(v2.c1.coeff({1, 1}) - 0.5 * I) < 1e-15);
  CHECK(std::abs(v2.c2.coeff({1, 1}) + 0.5 * I) < 1e-15);
  // The real symbol (-k2, k1)/|k|^2 differs from the inverse by the factor -i.
  Complex plain1 = -1.0 / 2.0, plain2 = 1.0 / 2.0;
  CHECK(std::abs(v2.c1.coeff({1, 1}) - (-I) * plain1) < 1e-15);
  CHECK(std::abs(v2.c2.coeff({1, 1}) - (-I) * plain2) < 1e-15);

  auto z = curl_inverse(FourierScalarField{box});
  CHECK(z.c1.l2_norm() == 0.0);
  CHECK(z.c2.l2_norm() == 0.0);
}

TEST_CASE("curl_inverse round trip and divergence (property)") {
  for (int trial = 0; trial < 20; ++trial) {
    auto w = random_field(8);
    auto v = curl_inverse(w);
    auto back = curl(v);
    CHECK((back - w).l2_norm() <= 1e-12 * w.l2_norm());
    double div = 0.0;
    for (auto d : v.divergence()) div = std::max(div, std::abs(d));
    CHECK(div <= 1e-14 * w.l2_norm());
  }
}

TEST_CASE("Sobolev norms") {
  FourierScalarField w{ModeBox(5)};
  w.set({3, 4}, 1.0);
  CHECK(w.sobolev_norm(2) == doctest::Approx(25.0));
  CHECK(w.sobolev_norm(0) == doctest::Approx(1.0));
  FourierScalarField e{ModeBox(2)};
  e.set({1, 0}, 1.0);
  CHECK(e.sobolev_norm(-1) == doctest::Approx(1.0));
}

TEST_CASE("stagnation points of the presets") {
  SUBCASE("cellular: four saddles and four centers") {
    auto a = find_stagnation_points(preset("cellular"));
    REQUIRE(a.points.size() == 8);
    CHECK(a.unresolved.empty());
    CHECK(a.count(StagnationKind::Hyperbolic) == 4);
    CHECK(a.count(StagnationKind::Center) == 4);
    for (const auto& p : a.points) {
      CHECK(p.residual <= 1e-12);
      CHECK(std::abs(p.jacobian.trace()) <= 1e-10);
      bool saddle_site = std::abs(std::fmod(p.location.x1, pi)) < 1e-9 || std::abs(std::fmod(p.location.x1, pi) - pi) < 1e-9;
      if (p.kind == StagnationKind::Hyperbolic) {
        CHECK(saddle_site);
        CHECK(p.exponent == doctest::Approx(1.0).epsilon(1e-12));
        Eigen::EigenSolver<Mat2> es(p.jacobian);
        auto ev = es.eigenvalues();
        CHECK(std::abs(ev(0).imag()) < 1e-12);
        CHECK(std::abs(std::abs(ev(0).real()) - 1.0) < 1e-10);
        CHECK(std::abs(ev(0).real() + ev(1).real()) < 1e-10);
      } else {
        CHECK(std::abs(std::fmod(p.location.x1, pi) - pi / 2) < 1e-9);
      }
    }
    // Lexicographic order; first point is the origin saddle.
    CHECK(a.points[0].location.x1 == doctest::Approx(0.0));
    CHECK(a.points[0].location.x2 == doctest::Approx(0.0));
    for (std::size_t i = 1; i < a.points.size(); ++i)
      CHECK(std::tie(a.points[i - 1].location.x1, a.points[i - 1].location.x2) <
            std::tie(a.points[i].location.x1, a.points[i].location.x2));
  }
  SUBCASE("rigid: none") {
    auto a = find_stagnation_points(preset("rigid"));
    CHECK(a.points.empty());
    CHECK(a.degenerate_lines.empty());
  }
  SUBCASE("shear: two degenerate lines") {
    auto a = find_stagnation_points(preset("shear"));
    REQUIRE(a.degenerate_lines.size() == 2);
    REQUIRE(a.points.size() == 2);
    for (const auto& p : a.points) {
      CHECK(p.kind == StagnationKind::Degenerate);
      double x2 = p.location.x2;
      CHECK(std::min(std::abs(x2), std::abs(x2 - pi)) < 1e-10);
      // Nilpotent Jacobian.
      CHECK(testsupport::max_abs(p.jacobian * p.jacobian) < 1e-12);
    }
    for (const auto& l : a.degenerate_lines) {
      CHECK(std::abs(l.direction.x()) == doctest::Approx(1.0));
      CHECK(l.cells > 10);
    }
  }
  SUBCASE("random trigonometric fields: hyperbolic points have zero trace") {
    for (int trial = 0; trial < 3; ++trial) {
      auto u = velocity_from_stream(random_field(2, true));
      auto a = find_stagnation_points(u);
      for (const auto& p : a.points) {
        CHECK(p.residual <= 1e-10);
        if (p.kind == StagnationKind::Hyperbolic) {
          CHECK(std::abs(p.jacobian.trace()) <= 1e-10);
          CHECK(p.exponent > 0.0);
        }
      }
    }
  }
}

TEST_CASE("mode-coefficient exchange format") {
  auto f = random_field(3);
  std::stringstream ss;
  auto c = nonzero_coefficients(f);
  write_mode_coefficients(ss, c);
  auto back = read_mode_coefficients(ss);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back[i].first == c[i].first);
    CHECK(back[i].second == c[i].second);
  }
  std::stringstream bad("k1,k2,re,im\n1,0,1,0\n");
  CHECK_THROWS_AS(read_mode_coefficients(bad), Error);
  std::stringstream zero("mode-coefficients v1\n0,0,1,0\n");
  CHECK_THROWS_AS(read_mode_coefficients(zero), Error);
}
