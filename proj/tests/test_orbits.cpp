#include <numbers>

#include "eulerspec/orbits.hpp"
#include "support.hpp"

using namespace eulerspec;
using namespace eulerspec::orbits;
using fields::preset;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("prime periods in closed form") {
  auto rigid = preset("rigid");
  for (int i = 0; i < 5; ++i) {
    auto p = prime_period(rigid, testsupport::random_point(), 20.0);
    CHECK(p.period == doctest::Approx(kTwoPi).epsilon(1e-9));
  }
  auto shear = preset("shear");
  CHECK(prime_period(shear, {0, pi / 2}, 20.0).period == doctest::Approx(kTwoPi).epsilon(1e-9));
  auto p = prime_period(shear, {0, 0.1}, 100.0);
  CHECK(p.period == doctest::Approx(kTwoPi / std::sin(0.1)).epsilon(1e-3));
  CHECK(p.return_distance <= 1e-8);

  auto st = prime_period(shear, {1.0, 0.0}, 10.0);
  CHECK(st.stagnation);
  CHECK(st.period == 0.0);

  auto cell = preset("cellular");
  auto open = prime_period(cell, {0.5, 0.0}, 50.0);
  CHECK(open.infinite());
}

TEST_CASE("period is constant along orbits (property)") {
  auto cell = preset("cellular");
  for (Vec2 x : {Vec2(1.0, 0.7), Vec2(2.0, 2.5), Vec2(0.4, 1.2)}) {
    auto p = prime_period(cell, x, 100.0);
    REQUIRE_FALSE(p.infinite());
    for (double s : {0.37, 1.9}) {
      Vec2 y = flow::flow_map(cell, x, s);
      CHECK(prime_period(cell, y, 100.0).period == doctest::Approx(p.period).epsilon(1e-6));
    }
  }
}

TEST_CASE("longest orbit scan") {
  SUBCASE("shear: witness near x2 = 0") {
    auto scan = longest_orbit_scan(preset("shear"), 100.0, 16, 200.0);
    REQUIRE(scan.found);
    CHECK(scan.witness.period >= 100.0);
    CHECK(std::min(scan.witness.point.x2, std::abs(scan.witness.point.x2 - pi)) < 0.1);
  }
  SUBCASE("rigid: bounded report") {
    auto scan = longest_orbit_scan(preset("rigid"), 10.0, 8, 20.0);
    CHECK_FALSE(scan.found);
    CHECK(scan.longest_finite == doctest::Approx(kTwoPi).epsilon(1e-8));
  }
  SUBCASE("cellular: periodic witness near the separatrix square") {
    auto scan = longest_orbit_scan(preset("cellular"), 100.0, 8, 200.0);
    REQUIRE(scan.found);
    CHECK(scan.witness.period >= 100.0);
    CHECK_FALSE(scan.witness.infinite());
    const auto& w = scan.witness.point;
    double dx = std::min(std::abs(std::remainder(w.x1, pi)), std::abs(std::remainder(w.x2, pi)));
    CHECK(dx < 1e-3);
  }
}

TEST_CASE("long orbit predicate") {
  auto c = long_orbit_predicate(preset("cellular"));
  CHECK(c.value);
  CHECK(c.stagnation_points == 8);
  CHECK_FALSE(long_orbit_predicate(preset("rigid")).value);
  CHECK(long_orbit_predicate(preset("shear")).value);
  // Consistency: when the predicate holds, a scan finds a long orbit.
  for (const char* name : {"cellular", "shear"}) {
    auto u = preset(name);
    if (!long_orbit_predicate(u).value) continue;
    CHECK(longest_orbit_scan(u, 50.0, 8, 100.0).found);
  }
}
