#include <sstream>

#include "eulerspec/approxeig.hpp"
#include "support.hpp"

using namespace eulerspec;
using namespace eulerspec::approxeig;
using fields::preset;

namespace {

const Complex I{0.0, 1.0};

// Trapezoid quotient int |gamma'|^2 / int |gamma|^2 on [-N, N].
double tent_quotient(const BumpProfile& p, int n) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    double t = -p.N() + 2.0 * p.N() * i / n, w = i == 0 || i == n ? 0.5 : 1.0;
    num += w * p.dgamma(t) * p.dgamma(t);
    den += w * p.gamma(t) * p.gamma(t);
  }
  return num / den;
}

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

fields::StagnationPoint origin_saddle(const fields::TrigVelocityField& u) {
  for (const auto& p : fields::find_stagnation_points(u).points)
    if (p.kind == fields::StagnationKind::Hyperbolic && p.location.vec().norm() < 1e-9) return p;
  throw std::runtime_error("no saddle at the origin");
}

}  // namespace

TEST_CASE("profiles: exact tent quotient is 3/N^2") {
  for (double N : {2.0, 5.0, 10.0}) {
    BumpProfile p(N, 0.1, 1, BetaVariant::Tent, 0.0);
    CHECK(tent_quotient(p, 200000) == doctest::Approx(3.0 / (N * N)).epsilon(1e-4));
    CHECK(p.gamma(0.0) == doctest::Approx(1.0));
    CHECK(p.gamma(N) == 0.0);
  }
  // The default smoothing stays close to the tent.
  BumpProfile q(6.0, 0.1, 1, BetaVariant::Tent);
  CHECK(q.smoothing() == doctest::Approx(0.06));
  CHECK(tent_quotient(q, 200000) == doctest::Approx(3.0 / 36.0).epsilon(0.02));
  CHECK(q.gamma(6.0) == 0.0);
  CHECK(q.gamma(-6.0) == 0.0);
}

TEST_CASE("profiles: smoothed gamma derivatives match finite differences") {
  BumpProfile p(4.0, 0.1, 1, BetaVariant::Tent);
  const double h = 1e-5;
  for (double t : {-3.97, -2.0, -0.02, 0.0, 0.01, 1.3, 3.99}) {
    CHECK(p.dgamma(t) == doctest::Approx((p.gamma(t + h) - p.gamma(t - h)) / (2 * h)).epsilon(1e-6));
    CHECK(p.d2gamma(t) == doctest::Approx((p.dgamma(t + h) - p.dgamma(t - h)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("profiles: tent and indicator beta") {
  BumpProfile tent(3.0, 0.05, 1, BetaVariant::Tent);
  double sup = 0.0;
  for (int i = 1; i < 100; ++i) {
    double tau = -0.05 + 0.1 * i / 100.0;
    if (std::abs(tau) < 1e-12) continue;
    CHECK(std::abs(tent.beta(tau, 1)) == doctest::Approx(1.0));
    sup = std::max(sup, std::abs(tent.beta(tau, 1)));
  }
  CHECK(sup == doctest::Approx(1.0));
  CHECK(tent.beta(0.0) == doctest::Approx(0.05));
  BumpProfile ind(3.0, 0.05, 0, BetaVariant::Indicator);
  CHECK(ind.beta(0.049) == 1.0);
  CHECK(ind.beta(0.051) == 0.0);
}

TEST_CASE("profiles: appendix beta conditions at m = 2") {
  std::vector<double> r0, r1, top;
  for (double s : {0.1, 0.05, 0.025}) {
    auto p = make_profiles(3.0, s, 2, BetaVariant::Appendix);
    const auto& c = p.conditions();
    const double h = 1e-4 * s;
    double sup0 = 0.0, sup1 = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      double tau = -s + 2.0 * s * i / 2000;
      // Independent numerical derivatives of the constructed beta.
      double d1 = (p.beta(tau + h) - p.beta(tau - h)) / (2 * h);
      double d2 = (p.beta(tau + h) - 2 * p.beta(tau) + p.beta(tau - h)) / (h * h);
      CHECK(p.beta(tau, 1) == doctest::Approx(d1).epsilon(1e-6).scale(s));
      CHECK(p.beta(tau, 2) == doctest::Approx(d2).epsilon(1e-4).scale(1.0));
      sup0 = std::max(sup0, std::abs(p.beta(tau)));
      sup1 = std::max(sup1, std::abs(d1));
      if (std::abs(tau) <= s * c.c) CHECK(std::abs(d2) > 0.5);
    }
    r0.push_back(sup0 / (s * s));
    r1.push_back(sup1 / s);
    CHECK(c.inf_top > 0.5);
    CHECK(c.c > 0.0);
    top.push_back(c.sup_top);
  }
  // (a): sup |beta| ~ s^2 and sup |beta'| ~ s.
  for (std::size_t i = 1; i < r0.size(); ++i) {
    CHECK(r0[i] == doctest::Approx(r0[0]).epsilon(1e-3));
    CHECK(r1[i] == doctest::Approx(r1[0]).epsilon(1e-3));
    CHECK(top[i] == doctest::Approx(top[0]).epsilon(1e-6));  // (c)
  }
}

TEST_CASE("profiles: invalid parameters") {
  CHECK_THROWS_AS(make_profiles(-1.0, 0.1, 1, BetaVariant::Tent), Error);
  CHECK_THROWS_AS(make_profiles(3.0, 0.0, 1, BetaVariant::Tent), Error);
  CHECK_THROWS_AS(make_profiles(3.0, 0.1, 0, BetaVariant::Appendix), Error);
  CHECK(beta_variant_from_string("appendix") == BetaVariant::Appendix);
  CHECK_THROWS_AS(beta_variant_from_string("box"), Error);
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(2.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
}

TEST_CASE("base point: cellular stable and unstable directions") {
  auto u = preset("cellular");
  auto y = origin_saddle(u);
  auto a = choose_base_point(u, y, 1.0, 0.1);
  CHECK(a.x() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(a.y()) < 1e-12);
  auto b = choose_base_point(u, y, -1.0, 0.1);
  CHECK(std::abs(b.x()) < 1e-12);
  CHECK(b.y() == doctest::Approx(0.1).epsilon(1e-12));

  fields::StagnationPoint centre = y;
  centre.kind = fields::StagnationKind::Center;
  CHECK_THROWS_AS(choose_base_point(u, centre, 1.0, 0.1), Error);
}

TEST_CASE("base point: speed decays like e^{-t}, better as delta shrinks") {
  auto u = preset("cellular");
  auto y = origin_saddle(u);
  double prev = 1e300;
  for (double delta : {0.2, 0.1, 0.05}) {
    auto x0 = choose_base_point(u, y, 1.0, delta);
    const double t = 2.0;
    double ratio = u.velocity(flow::flow_map(u, x0, t)).norm() / u.velocity(x0).norm();
    double err = std::abs(ratio - std::exp(-t));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("build_F: Ft / F equals gamma' / gamma") {
  auto u = preset("shear");
  Vec2 x0(0.0, 1.0);
  auto p = make_profiles(2.0, 0.05, 0, BetaVariant::Indicator);
  auto chart = flow::build_chart(u, x0, 2.0, 0.05);
  auto S = build_F(Complex(0.3, 1.1), p, chart);
  for (std::size_t i = 0; i < chart.t.size(); i += 7)
    for (std::size_t j = 0; j < chart.tau.size(); j += 3) {
      auto F = S.F[i * chart.tau.size() + j];
      if (std::abs(F) < 1e-12) continue;
      double ratio = p.dgamma(chart.t[i]) / p.gamma(chart.t[i]);
      CHECK(std::abs(S.Ft[i * chart.tau.size() + j] / F - ratio) <= 1e-12 * std::max(1.0, std::abs(ratio)));
    }
  // Real and symmetric in t for alpha = 0.
  auto T = make_profiles(2.0, 0.05, 1, BetaVariant::Tent);
  auto S0 = build_F(0.0, T, chart);
  const std::size_t nt = chart.t.size(), ns = chart.tau.size();
  for (std::size_t i = 0; i < nt; i += 5)
    for (std::size_t j = 0; j < ns; ++j) {
      CHECK(S0.F[i * ns + j].imag() == 0.0);
      CHECK(S0.F[i * ns + j].real() == doctest::Approx(S0.F[(nt - 1 - i) * ns + j].real()).epsilon(1e-12));
    }
  // |F| does not depend on xi.
  auto S1 = build_F(I, T, chart), S2 = build_F(3.0 * I, T, chart);
  for (std::size_t i = 0; i < S1.F.size(); i += 11) CHECK(std::abs(S1.F[i]) == doctest::Approx(std::abs(S2.F[i])));
}

TEST_CASE("synthesize: rigid chart against the direct integral") {
  auto u = preset("rigid");
  const Vec2 x0(1.0, 2.0);
  const double N = 1.0, s = 0.6;
  flow::ChartOptions opt;
  opt.n_t = 400;
  opt.n_tau = 240;
  auto chart = flow::build_chart(u, x0, N, s, opt);
  REQUIRE(chart.injectivity_ok);
  // H(t, tau) = x0 + (t, tau).
  for (std::size_t i = 0; i < chart.samples.size(); i += 97) {
    auto q = chart.samples[i];
    CHECK((q.h - x0 - Vec2(chart.t[i / chart.tau.size()], chart.tau[i % chart.tau.size()])).norm() < 1e-12);
  }
  auto rho = [&](double t, double tau) { return std::exp(I * tau) * bump(t / N) * bump(tau / s); };
  std::vector<Complex> F(chart.samples.size());
  for (std::size_t i = 0; i < chart.t.size(); ++i)
    for (std::size_t j = 0; j < chart.tau.size(); ++j) F[i * chart.tau.size() + j] = rho(chart.t[i], chart.tau[j]);
  const int M = 6;
  auto g = synthesize(chart, F, M, 0);
  // Separable oracle on a much finer midpoint lattice.
  const int n = 20000;
  for (std::size_t idx = 0; idx < g.field.box().size(); ++idx) {
    auto k = g.field.box().mode(idx);
    Complex a{}, b{};
    for (int i = 0; i < n; ++i) {
      double t = -N + 2.0 * N * (i + 0.5) / n, tau = -s + 2.0 * s * (i + 0.5) / n;
      a += bump(t / N) * std::exp(-I * double(k.k1) * t);
      b += bump(tau / s) * std::exp(I * tau - I * double(k.k2) * tau);
    }
    Complex expect = a * b * (2.0 * N / n) * (2.0 * s / n) * std::exp(-I * (double(k.k1) * x0.x() + double(k.k2) * x0.y())) /
                     (kTwoPi * kTwoPi);
    CHECK(std::abs(g.field.data()[idx] - expect) < 1e-8);
  }
}

TEST_CASE("synthesize: zero samples and Parseval") {
  auto u = preset("shear");
  auto chart = flow::build_chart(u, Vec2(0.0, 1.2), 1.5, 0.1);
  std::vector<Complex> zero(chart.samples.size());
  auto z = synthesize(chart, zero, 8, 0);
  CHECK(z.field.l2_norm() == 0.0);
  CHECK(!z.certificate_valid);

  auto p = make_profiles(1.5, 0.1, 1, BetaVariant::Tent, 0.2);
  auto S = build_F(Complex(0.0, 0.4), p, chart);
  auto g = synthesize(chart, S.F, 96, 0);
  double direct = 0.0;
  const std::size_t ns = chart.tau.size();
  for (std::size_t i = 0; i < chart.t.size(); ++i)
    for (std::size_t j = 0; j < ns; ++j) {
      double w = (i == 0 || i + 1 == chart.t.size() ? 0.5 : 1.0) * (j == 0 || j + 1 == ns ? 0.5 : 1.0);
      direct += w * std::norm(S.F[i * ns + j]);
    }
  direct *= chart.dt() * chart.dtau() / (kTwoPi * kTwoPi);
  double spectral = std::pow(g.field.l2_norm(), 2) + std::norm(g.mean);
  CHECK(spectral == doctest::Approx(direct).epsilon(0.01));
}

TEST_CASE("symmetrize: mean projection and partner") {
  auto u = preset("shear");
  const Vec2 x0(0.0, std::numbers::pi / 2);  // |u| = 1, period 2 pi
  const double N = 1.0, s = 0.15, offset = 2.0 * N + 1.0;
  auto p = make_profiles(N, s, 1, BetaVariant::Tent, 0.2);
  auto chart = flow::build_chart(u, x0, N, s);
  auto pchart = flow::build_chart(u, flow::flow_map(u, x0, offset), N, s);
  const Complex alpha(0.0, 0.5);
  auto f = synthesize(chart, build_F(alpha, p, chart).F, 64, 0);
  auto fb = synthesize(pchart, build_F(alpha, p, pchart).F, 64, 0);

  auto a = symmetrize(f, 0);
  CHECK(a.field.coeff({0, 0}) == Complex{});
  CHECK(a.field.l2_norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.mean == f.mean);

  auto b = symmetrize(f, chart, fb, pchart, offset, 0);
  CHECK(b.field.coeff({0, 0}) == Complex{});
  CHECK(b.field.l2_norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(b.mean) < 1e-15);
  CHECK(std::abs(b.partner_weight * fb.mean - f.mean) < 1e-15);
  // Disjoint supports: the cross term vanishes (f and fbar with means restored).
  auto full = [](const Synthesis& x) { return std::pow(x.field.l2_norm(), 2) + std::norm(x.mean); };
  double lhs = std::pow(b.scale, 2);
  double rhs = full(f) + std::norm(b.partner_weight) * full(fb) - std::norm(f.mean - b.partner_weight * fb.mean);
  CHECK(lhs == doctest::Approx(rhs).epsilon(0.01));
  // Residual of the difference against the triangle inequality.
  const Complex z = -alpha;
  double rf = residual(u, z, f.field, 0).residual * f.field.l2_norm();
  double rb = residual(u, z, fb.field, 0).residual * fb.field.l2_norm() * std::abs(b.partner_weight);
  double rd = residual(u, z, b.field, 0).residual * b.scale;
  CHECK(rd <= rf + rb + 1e-9);

  // A partner on top of f is rejected.
  auto same = flow::build_chart(u, flow::flow_map(u, x0, 0.5), N, s);
  auto fs = synthesize(same, build_F(alpha, p, same).F, 64, 0);
  CHECK_THROWS_AS(symmetrize(f, chart, fs, same, 0.5, 0), Error);
}

TEST_CASE("residual: rigid single mode") {
  auto u = preset("rigid");
  const std::vector<std::pair<fields::ModeIndex, Complex>> c{{{1, 0}, 1.0}};
  auto g = fields::FourierScalarField::from_coefficients(4, c);
  CHECK(residual(u, -I, g, 0).residual < 1e-15);
  CHECK(residual(u, -I + 0.5, g, 0).residual == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(residual(u, -I + 0.5, g, 2).residual == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(residual(u, -I, g, 0).kg == 0.0);

  ApproxEigenfunction bad;
  bad.field = g;
  bad.certificate_valid = false;
  CHECK_THROWS_AS(residual(u, -I, bad), Error);
  bad.certificate_valid = true;
  CHECK(residual(u, -I, bad).residual < 1e-15);
}

TEST_CASE("predicted bound: sqrt(3)/N on rigid and shear") {
  for (double N : {2.0, 5.0}) {
    auto p = make_profiles(N, 0.02, 0, BetaVariant::Indicator, 0.0);
    const double expect = std::sqrt(3.0) / N;
    CHECK(predicted_bound(preset("rigid"), Vec2(0.3, 0.3), 0.0, 0, p, 20000) == doctest::Approx(expect).epsilon(1e-5));
    // Constant speed along the streamline cancels for m = 1 as well.
    auto q = make_profiles(N, 0.02, 1, BetaVariant::Tent, 0.0);
    CHECK(predicted_bound(preset("shear"), Vec2(0.3, 1.0), 0.0, 1, q, 20000) == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("predicted bound: cellular weight tends to one near the saddle") {
  auto u = preset("cellular");
  auto y = origin_saddle(u);
  auto p = make_profiles(3.0, 0.01, 1, BetaVariant::Appendix);
  const double limit = std::sqrt(tent_quotient(p, 200000));
  double prev = 1e300;
  for (double delta : {0.1, 0.01, 0.001}) {
    double err = std::abs(predicted_bound(u, choose_base_point(u, y, 1.0, delta), 1.0, 1, p) - limit);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3 * limit);
}

TEST_CASE("A-action identity on a resolved shear strip") {
  SweepSpec spec;
  spec.scenario = "shear-resolved";
  spec.flow = "shear";
  spec.theorem = TheoremCase::LongOrbit;
  spec.m = 0;
  spec.xi = {0.37, 1.5};
  spec.N = {2.0};
  spec.s = {0.4};
  spec.beta = BetaVariant::Tent;
  spec.symmetrization = Symmetrization::MeanProjection;
  spec.M = 64;
  auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.injectivity_ok);
    CHECK(r.certificate_valid);
    CHECK(r.tail <= kTailLimit);
    CHECK(r.a_action_error <= 0.05);
    CHECK(r.residual >= 0.0);
    CHECK(r.residual <= 3.0 * r.predicted);
  }
}

TEST_CASE("sweep: rigid lattice rows are flagged yet keep the floor") {
  auto spec = named_sweep("rigid-lattice");
  spec.N = {5.0};
  auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 1);
  const auto& r = rep.rows[0];
  CHECK(!r.note.empty());
  CHECK(!r.certificate_valid);
  CHECK(r.residual >= 0.3);
  CHECK(rep.trend.flagged_rows == 1);
  CHECK(r.strip_area == doctest::Approx(4.0 * 5.0 * 0.02));
}

TEST_CASE("sweep: named scenarios and CSV") {
  for (const auto& n : sweep_names()) CHECK(named_sweep(n).scenario == n);
  CHECK_THROWS_AS(named_sweep("nope"), Error);
  ResidualReport rep;
  ResidualRow r;
  r.scenario = "x";
  r.m = 1;
  r.N = 4;
  r.residual = 0.25;
  rep.rows.push_back(r);
  std::ostringstream os;
  write_report_csv(os, rep);
  CHECK(os.str().rfind("scenario,m,lambda,xi,N,s,residual,predicted,kg_norm,tail,inj\n", 0) == 0);
  CHECK(os.str().find("x,1,0,0,4,0,0.25,nan,nan,nan,0") != std::string::npos);
}

TEST_CASE("summarize: trend statistics") {
  std::vector<ResidualRow> rows;
  auto add = [&](double N, double xi, double res) {
    ResidualRow r;
    r.N = N;
    r.xi = xi;
    r.s = 0.01;
    r.residual = res;
    r.predicted = 1.0 / N;
    r.certificate_valid = r.injectivity_ok = r.period_ok = true;
    rows.push_back(r);
  };
  add(4, 0.0, 0.3);
  add(6, 0.0, 0.2);
  add(4, 1.0, 0.4);
  add(6, 1.0, 0.1);
  auto t = summarize(rows);
  CHECK(t.decreasing_in_N);
  CHECK(t.max_xi_variation == doctest::Approx(0.5));
  CHECK(t.max_ratio_to_predicted == doctest::Approx(1.6));
  CHECK(t.flagged_rows == 0);
  add(8, 1.0, 0.2);
  CHECK(!summarize(rows).decreasing_in_N);
}

TEST_CASE("sweep: |Kg| shrinks with the strip width") {
  SweepSpec spec;
  spec.scenario = "shear-width";
  spec.flow = "shear";
  spec.theorem = TheoremCase::LongOrbit;
  spec.m = 0;
  spec.xi = {0.37};
  spec.N = {2.0};
  spec.s = {0.4, 0.2, 0.1};
  spec.beta = BetaVariant::Tent;
  spec.symmetrization = Symmetrization::MeanProjection;
  spec.M = 64;
  auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[1].kg_norm < rep.rows[0].kg_norm);
  CHECK(rep.rows[2].kg_norm < rep.rows[1].kg_norm);
}
