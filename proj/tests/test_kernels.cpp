#include "eulerspec/kernels.hpp"
#include "support.hpp"

using namespace eulerspec;
using kernels::Exec;
using testsupport::random_point;

namespace {

std::vector<Vec2> random_points(int n) {
  std::vector<Vec2> p;
  for (int i = 0; i < n; ++i) p.push_back(random_point());
  return p;
}

}  // namespace

TEST_CASE("nudft: separable against direct summation") {
  auto pts = random_points(150);
  std::vector<Complex> w;
  for (int i = 0; i < 150; ++i) w.emplace_back(testsupport::uniform(-1, 1), testsupport::uniform(-1, 1));
  for (int M : {1, 5, 12}) {
    auto d = kernels::nudft_direct(pts, w, M);
    auto s = kernels::nudft(pts, w, M, Exec::Serial);
    auto p = kernels::nudft(pts, w, M, Exec::Parallel);
    REQUIRE(d.size() == fields::ModeBox(M).size());
    REQUIRE(s.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(std::abs(s[i] - d[i]) < 1e-11);
      CHECK(std::abs(s[i] - p[i]) < 1e-12);  // the parallel path blocks the product differently
    }
  }
  // A single unit mass at the origin has all coefficients one.
  for (auto c : kernels::nudft({Vec2(0.0, 0.0)}, {1.0}, 3, Exec::Serial)) CHECK(std::abs(c - 1.0) < 1e-15);
  CHECK(kernels::nudft({}, {}, 2, Exec::Serial) == std::vector<Complex>(fields::ModeBox(2).size()));
}

TEST_CASE("evaluate: kernel against the field's own evaluation") {
  auto f = testsupport::random_field(6);
  auto pts = random_points(64);
  auto s = kernels::evaluate(f, pts, Exec::Serial);
  auto p = kernels::evaluate(f, pts, Exec::Parallel);
  CHECK(s == p);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(s[i] - f.evaluate(pts[i])) < 1e-11);
}

TEST_CASE("advect: kernel against flow_map, both paths") {
  auto u = fields::preset("cellular");
  auto pts = random_points(16);
  flow::StepControl sc;
  auto s = kernels::advect(u, pts, 1.5, sc, Exec::Serial);
  auto p = kernels::advect(u, pts, 1.5, sc, Exec::Parallel);
  CHECK(s == p);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((s[i] - flow::flow_map(u, pts[i], 1.5, sc)).norm() < 1e-12);
  // Rigid translation is exact.
  auto r = kernels::advect(fields::preset("rigid"), {Vec2(0.5, 0.25)}, 2.0, sc, Exec::Serial);
  CHECK((r[0] - Vec2(2.5, 0.25)).norm() < 1e-12);
}
