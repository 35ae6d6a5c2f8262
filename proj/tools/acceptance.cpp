#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "eulerspec/operators.hpp"
#include "eulerspec/orbits.hpp"

namespace eulerspec::acceptance {

namespace {

using fields::preset;

std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

Vec2 random_point() {
  std::uniform_real_distribution<double> d(0.0, kTwoPi);
  return {d(rng()), d(rng())};
}

template <class... Args>
std::string fmt(Args&&... args) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << args);
  return os.str();
}

Verdict make(const char* id, bool pass, std::string detail) { return {id, pass, std::move(detail), 0.0}; }

// Lambda of the cellular flow at the AC5 resolution, shared by AC6, AC12
// and AC13.
const lyapunov::GlobalExponent& cellular_lambda() {
  static const auto g = lyapunov::global_exponent(preset("cellular"), 30.0, 64);
  return g;
}

}  // namespace

Verdict ac1() {
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    fields::FourierScalarField w{fields::ModeBox(32)};
    for (auto& c : w.data()) c = {n(rng()), n(rng())};
    auto back = fields::curl(fields::curl_inverse(w));
    back -= w;
    worst = std::max(worst, back.l2_norm() / w.l2_norm());
  }
  return make("AC1", worst <= 1e-12, fmt("max relative round-trip error ", worst, " (<= 1e-12)"));
}

Verdict ac2() {
  auto u = preset("cellular");
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    auto s = flow::tangent_flow(u, random_point(), 10.0, {.step = 1e-3});
    worst = std::max(worst, std::abs(s.M.determinant() - 1.0));
  }
  return make("AC2", worst <= 1e-6, fmt("max |det Dphi_10 - 1| = ", worst, " (<= 1e-6)"));
}

Verdict ac3() {
  auto c = flow::build_chart(preset("cellular"), {0.1, 0.0}, 6.0, 1e-3);
  bool ok = c.injectivity_ok && c.max_det_error <= 1e-4 && c.max_perp_error <= 1e-6;
  return make("AC3", ok,
              fmt("injective ", c.injectivity_ok ? "yes" : "no", ", max |det DH - 1| = ", c.max_det_error,
                  " (<= 1e-4), DH^-T e2 vs u_perp = ", c.max_perp_error, " (<= 1e-6)"));
}

Verdict ac4() {
  auto u = preset("cellular");
  std::uniform_real_distribution<double> a(0.0, kTwoPi);
  double worst = 0.0;
  for (int r = 0; r < 20; ++r) {
    Vec2 x = random_point();
    const double th = a(rng());
    const Vec2 xi(std::cos(th), std::sin(th));
    auto tr = lyapunov::bas_trajectory(u, x, xi, perp(xi), 20.0);
    worst = std::max(worst, tr.first_integral_drift);
  }
  return make("AC4", worst <= 1e-6, fmt("max relative drift of |b||xi| at T=20: ", worst, " (<= 1e-6)"));
}

Verdict ac5() {
  const auto& cell = cellular_lambda();
  auto stag = lyapunov::stagnation_exponents(preset("cellular"));
  double top = stag.empty() ? 0.0 : stag.back();
  auto rigid = lyapunov::global_exponent(preset("rigid"), 30.0, 64);
  auto shear = lyapunov::global_exponent(preset("shear"), 30.0, 64);
  bool ok = cell.grid_value >= 0.95 && cell.grid_value <= 1.05 && std::abs(top - 1.0) <= 1e-10 &&
            rigid.value <= 0.05 && shear.value <= 0.05;
  return make("AC5", ok,
              fmt("cellular grid estimate ", cell.grid_value, " in [0.95, 1.05]; saddle exponent error ",
                  std::abs(top - 1.0), " (<= 1e-10); rigid ", rigid.value, ", shear ", shear.value, " (<= 0.05)"));
}

Verdict ac6() {
  const double Lambda = cellular_lambda().value;
  auto mu = lyapunov::bas_max_exponent(preset("cellular"), {.count = 50}, 30.0);
  return make("AC6", std::abs(mu.value - Lambda) <= 0.05,
              fmt("mu = ", mu.value, ", Lambda = ", Lambda, ", |mu - Lambda| = ", std::abs(mu.value - Lambda),
                  " (<= 0.05)"));
}

Verdict ac7() {
  auto u = preset("cellular");
  auto L = operators::assemble_L(u, 12);
  auto w = u.vorticity().resized(12);
  double kernel = (L.matrix * operators::to_vector(w)).norm();
  auto sim = operators::check_similarity(u, 8);
  bool ok = kernel <= 1e-12 && sim.discrepancy <= 1e-10;
  return make("AC7", ok,
              fmt("|L curl u| = ", kernel, " (<= 1e-12); similarity discrepancy ", sim.discrepancy, " on ",
                  sim.interior_modes, " interior modes (<= 1e-10)"));
}

Verdict ac8() {
  auto L = operators::assemble_L(preset("rigid"), 4);
  auto ev = operators::spectrum(L, 0);
  std::map<int, int> want, got;
  for (std::size_t i = 0; i < L.box.size(); ++i) ++want[-L.box.mode(i).k1];
  double worst = 0.0;
  for (auto z : ev) {
    int k = int(std::lround(z.imag()));
    worst = std::max(worst, std::abs(z - Complex(0.0, k)));
    ++got[k];
  }
  bool ok = worst <= 1e-10 && got == want;
  return make("AC8", ok,
              fmt("max distance to {-i k1} ", worst, ", multiplicities ", got == want ? "match" : "differ",
                  ". Note: on [0, 2 pi]^2 the rigid spectrum is i Z; the lattice 2 pi i Z belongs to the unit "
                  "torus convention"));
}

Verdict ac9_from(const approxeig::ResidualReport& rep) {
  bool ok = !rep.rows.empty();
  std::ostringstream os;
  os.precision(4);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) {
    const double bound = 2.0 * std::sqrt(3.0) / r.N;
    bool row = std::isfinite(r.residual) && r.residual <= bound && r.residual < prev;
    ok = ok && row;
    prev = std::isfinite(r.residual) ? r.residual : prev;
    os << "N=" << r.N << ": " << r.residual << " vs " << bound << (row ? "" : " FAIL")
       << (r.note.empty() ? "" : " [" + r.note + "]") << "; ";
  }
  return make("AC9", ok, os.str());
}

Verdict ac10_from(const approxeig::ResidualReport& rep) {
  bool ok = !rep.rows.empty() && rep.trend.decreasing_in_N && rep.trend.max_xi_variation <= 0.25;
  double worst = 0.0;
  for (const auto& r : rep.rows) {
    bool row = std::isfinite(r.residual) && r.predicted > 0.0 && r.residual <= 3.0 * r.predicted;
    ok = ok && row;
    if (std::isfinite(r.residual) && r.predicted > 0.0) worst = std::max(worst, r.residual / r.predicted);
    else worst = std::numeric_limits<double>::infinity();
  }
  return make("AC10", ok,
              fmt("max residual/predicted ", worst, " (<= 3), decreasing in N ",
                  rep.trend.decreasing_in_N ? "yes" : "no", ", xi-variation ", rep.trend.max_xi_variation,
                  " (<= 0.25), flagged rows ", rep.trend.flagged_rows, "/", rep.rows.size()));
}

Verdict ac11_from(const approxeig::ResidualReport& rep) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows)
    if (std::isfinite(r.residual)) best = std::min(best, r.residual);
  return make("AC11", std::isfinite(best) && best >= 0.3,
              fmt("best residual ", best, " over ", rep.rows.size(), " rows (>= 0.3)"));
}

Verdict ac9() { return ac9_from(approxeig::sweep(approxeig::named_sweep("shear-long-orbit"))); }
Verdict ac10() { return ac10_from(approxeig::sweep(approxeig::named_sweep("cellular-hyperbolic"))); }
Verdict ac11() { return ac11_from(approxeig::sweep(approxeig::named_sweep("rigid-lattice"))); }

Verdict ac12() {
  const double Lambda = cellular_lambda().value;
  auto u = preset("cellular");
  auto seed = operators::gaussian_bump({0.2, 0.2}, 0.3);
  std::string detail;
  bool ok = true;
  for (int m : {1, 0}) {
    operators::GrowthOptions opt;
    opt.push.tail_index = m;
    std::string route;
    try {
      auto g = operators::semigroup_growth(u, m, seed, 8.0, opt);
      bool pass = m == 1 ? std::abs(g.value - Lambda) <= 0.15 * Lambda : std::abs(g.value) <= 1e-3;
      ok = ok && pass;
      route = fmt("m=", m, " pushforward rate ", g.value, pass ? "" : " FAIL", " (max tail ", g.max_tail, ")");
    } catch (const Error& e) {
      ok = false;
      route = fmt("m=", m, " pushforward FAIL: ", e.what());
    }
    // Quadrature route, reported only.
    auto q = operators::semigroup_growth_lagrangian(u, m, seed, 8.0, 256);
    detail += route + fmt(", lagrangian diagnostic ", q.value, "; ");
  }
  return make("AC12", ok, detail + fmt("target m=1: within 15% of Lambda = ", Lambda, ", m=0: |rate| <= 1e-3"));
}

Verdict ac13() {
  const double Lambda = cellular_lambda().value;
  auto u = preset("cellular");
  const int n = 32;
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pts.emplace_back(kTwoPi * i / n, kTwoPi * j / n);
  auto logs = kernels::log_second_norm_at(u, pts, {10.0}, {}, kernels::Exec::Parallel);
  const double rate = *std::max_element(logs.begin(), logs.end()) / 10.0;

  // Second variation against a finite-difference stencil of phi_5.
  double worst = 0.0;
  const double t = 5.0, h = 1e-3;
  for (int r = 0; r < 5; ++r) {
    Vec2 x = random_point();
    auto s = flow::second_variation(u, x, t);
    double scale = std::max({s.M2[0].norm(), s.M2[1].norm(), 1.0});
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        Vec2 ej = Vec2::Zero(), ek = Vec2::Zero();
        ej(j) = h;
        ek(k) = h;
        Vec2 d = (flow::flow_map(u, x + ej + ek, t) - flow::flow_map(u, x + ej - ek, t) -
                  flow::flow_map(u, x - ej + ek, t) + flow::flow_map(u, x - ej - ek, t)) /
                 (4 * h * h);
        for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(s.M2[i](j, k) - d(i)) / scale);
      }
  }
  bool ok = rate <= 2.0 * Lambda + 0.1 && worst <= 1e-4;
  return make("AC13", ok,
              fmt("(1/10) log max |D^2 phi_10| = ", rate, " (<= ", 2.0 * Lambda + 0.1,
                  "); second variation vs finite differences ", worst, " (<= 1e-4)"));
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"AC1", ac1},   {"AC2", ac2},   {"AC3", ac3},   {"AC4", ac4},   {"AC5", ac5},
      {"AC6", ac6},   {"AC7", ac7},   {"AC8", ac8},   {"AC9", ac9},   {"AC10", ac10},
      {"AC11", ac11}, {"AC12", ac12}, {"AC13", ac13},
  };
  return all;
}

Verdict evaluate(const Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const Error& e) {
    v = {c.id, false, std::string(to_string(e.kind())) + ": " + e.what(), 0.0};
  }
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

}  // namespace eulerspec::acceptance
