#include "eulerspec/approxeig.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <optional>
#include <unordered_map>
#include <ostream>

#include "eulerspec/orbits.hpp"

namespace eulerspec::approxeig {

const char* to_string(BetaVariant v) {
  switch (v) {
    case BetaVariant::Tent: return "tent";
    case BetaVariant::Indicator: return "indicator";
    case BetaVariant::Appendix: return "appendix";
  }
  return "?";
}

BetaVariant beta_variant_from_string(const std::string& name) {
  if (name == "tent") return BetaVariant::Tent;
  if (name == "indicator") return BetaVariant::Indicator;
  if (name == "appendix") return BetaVariant::Appendix;
  throw Error(ErrorKind::InvalidInput, "unknown beta variant '" + name + "'");
}

const char* to_string(Symmetrization s) {
  return s == Symmetrization::Partner ? "partner" : "mean-projection";
}

namespace {

// Truncated Taylor series c_k = f^(k)(x) / k!.
using Jet = std::vector<double>;

Jet jet_var(double x, std::size_t n) {
  Jet j(n, 0.0);
  j[0] = x;
  if (n > 1) j[1] = 1.0;
  return j;
}

Jet jet_mul(const Jet& a, const Jet& b) {
  Jet c(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i <= k; ++i) c[k] += a[i] * b[k - i];
  return c;
}

Jet jet_div(const Jet& a, const Jet& b) {
  Jet q(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    double s = a[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b[i] * q[k - i];
    q[k] = s / b[0];
  }
  return q;
}

Jet jet_exp(const Jet& a) {
  Jet e(a.size(), 0.0);
  e[0] = std::exp(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += double(j) * a[j] * e[k - j];
    e[k] = s / double(k);
  }
  return e;
}

// h(x) = exp(-1/x) for x > 0, else 0, as a jet in x.
Jet jet_h(const Jet& x) {
  if (x[0] <= 0.0) return Jet(x.size(), 0.0);
  Jet one(x.size(), 0.0);
  one[0] = -1.0;
  return jet_exp(jet_div(one, x));
}

// Jet of the smooth step at x.
Jet step_jet(double x, std::size_t n) {
  Jet X = jet_var(x, n);
  Jet Y(n, 0.0);  // 1 - x
  Y[0] = 1.0 - x;
  if (n > 1) Y[1] = -1.0;
  Jet a = jet_h(X), b = jet_h(Y);
  Jet sum(n);
  for (std::size_t k = 0; k < n; ++k) sum[k] = a[k] + b[k];
  return jet_div(a, sum);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// phi(x) = S(2 (1 - |x|)): 1 on [-1/2, 1/2], 0 outside (-1, 1). Jet in x.
Jet phi_jet(double x, std::size_t n) {
  if (std::abs(x) >= 1.0) return Jet(n, 0.0);
  Jet j = step_jet(2.0 * (1.0 - std::abs(x)), n);
  const double d = x >= 0.0 ? -2.0 : 2.0;
  double p = 1.0;
  for (std::size_t k = 0; k < n; ++k, p *= d) j[k] *= p;
  return j;
}

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(std::size_t(n)), w(std::size_t(n)) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[std::size_t(i)] = z;
      w[std::size_t(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss64() {
  static const GaussLegendre g(64);
  return g;
}

}  // namespace

double smooth_step(double x) { return step_jet(x, 1)[0]; }

// ---------------------------------------------------------------------------

BumpProfile::BumpProfile(double N, double s, int m, BetaVariant variant, double smoothing)
    : N_(N), s_(s), m_(m), variant_(variant) {
  if (!(N > 0.0)) throw Error(ErrorKind::InvalidInput, "profile half-length must be positive");
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidInput, "profile half-width must be positive");
  if (m < 0) throw Error(ErrorKind::InvalidInput, "Sobolev index must be non-negative");
  if (variant == BetaVariant::Appendix && (m < 1 || m > 6))
    throw Error(ErrorKind::InvalidInput, "the appendix cut-off needs 1 <= m <= 6");
  w_ = smoothing < 0.0 ? 0.1 * std::min(1.0, N / 10.0) : smoothing;
  if (w_ >= N) throw Error(ErrorKind::InvalidInput, "smoothing width must be below N");
  Nk_ = N - 0.5 * w_;
}

double BumpProfile::kernel(double x) const {
  if (w_ == 0.0 || std::abs(x) >= 0.5 * w_) return 0.0;
  return step_jet(x / w_ + 0.5, 2)[1] / w_;
}

double BumpProfile::step(double x) const {
  if (w_ == 0.0) return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5);
  return smooth_step(x / w_ + 0.5);
}

double BumpProfile::ramp(double x) const {
  const double h = 0.5 * w_;
  if (x <= -h) return 0.0;
  if (x >= h) return x;
  // int_{-h}^{x} step(y) dy
  const auto& g = gauss64();
  const double a = -h, half = 0.5 * (x - a), mid = 0.5 * (x + a);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * step(mid + half * g.x[i]);
  return acc * half;
}

double BumpProfile::gamma(double t) const {
  if (std::abs(t) >= N_) return 0.0;
  return (ramp(t + Nk_) - 2.0 * ramp(t) + ramp(t - Nk_)) / Nk_;
}

double BumpProfile::dgamma(double t) const {
  if (std::abs(t) >= N_) return 0.0;
  return (step(t + Nk_) - 2.0 * step(t) + step(t - Nk_)) / Nk_;
}

double BumpProfile::d2gamma(double t) const {
  if (std::abs(t) >= N_) return 0.0;
  return (kernel(t + Nk_) - 2.0 * kernel(t) + kernel(t - Nk_)) / Nk_;
}

double BumpProfile::beta(double tau, int k) const {
  if (k < 0) throw Error(ErrorKind::InvalidInput, "derivative order must be non-negative");
  if (std::abs(tau) > s_) return 0.0;
  switch (variant_) {
    case BetaVariant::Indicator:
      return k == 0 ? 1.0 : 0.0;
    case BetaVariant::Tent:
      if (k == 0) return s_ - std::abs(tau);
      if (k == 1) return tau > 0.0 ? -1.0 : (tau < 0.0 ? 1.0 : 0.0);
      return 0.0;
    case BetaVariant::Appendix: {
      if (k > m_ + 1) throw Error(ErrorKind::InvalidInput, "appendix cut-off derivatives stop at m + 1");
      const std::size_t n = std::size_t(k) + 1;
      Jet p = phi_jet(tau / s_, n);
      double sc = 1.0;
      for (std::size_t j = 0; j < n; ++j, sc /= s_) p[j] *= sc;
      Jet q(n, 0.0);  // tau^m / m! around tau
      for (std::size_t j = 0; j < n && int(j) <= m_; ++j)
        q[j] = std::pow(tau, double(m_ - int(j))) / (factorial(int(j)) * factorial(m_ - int(j)));
      return jet_mul(p, q)[std::size_t(k)] * factorial(k);
    }
  }
  return 0.0;
}

BumpProfile make_profiles(double N, double s, int m, BetaVariant variant, double smoothing) {
  BumpProfile p(N, s, m, variant, smoothing);
  if (variant != BetaVariant::Appendix) return p;
  AppendixConditions c;
  const std::size_t n = std::size_t(m) + 1;
  for (int i = 0; i <= 2000; ++i) {
    Jet j = phi_jet(-1.0 + i / 1000.0, n);
    for (std::size_t l = 0; l < n; ++l) c.phi_cm = std::max(c.phi_cm, std::abs(j[l]) * factorial(int(l)));
  }
  auto excess = [&](double cc) {
    double sum = 0.0;
    for (int l = 1; l <= m; ++l) sum += factorial(m) / (factorial(l) * factorial(m - l)) * std::pow(cc, l) / factorial(l);
    return c.phi_cm * sum - 0.5;
  };
  double lo = 0.0, hi = 0.5;
  if (excess(hi) < 0.0) {
    lo = hi;
  } else {
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (excess(mid) < 0.0 ? lo : hi) = mid;
    }
  }
  c.c = 0.99 * lo;
  c.lower_ratio.assign(std::size_t(m), 0.0);
  c.inf_top = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    double tau = s * (-1.0 + i / 1000.0);
    for (int k = 0; k < m; ++k)
      c.lower_ratio[std::size_t(k)] = std::max(c.lower_ratio[std::size_t(k)], std::abs(p.beta(tau, k)) / std::pow(s, m - k));
    double top = std::abs(p.beta(tau, m));
    c.sup_top = std::max(c.sup_top, top);
    if (std::abs(tau) <= s * c.c) c.inf_top = std::min(c.inf_top, top);
  }
  if (!(c.c > 0.0) || !(c.inf_top > 0.5))
    throw Error(ErrorKind::Construction, "cut-off condition (b) fails: inf |beta^(m)| on [-sc, sc] = " +
                                             std::to_string(c.inf_top) + " with c = " + std::to_string(c.c));
  p.cond_ = c;
  return p;
}

}  // namespace eulerspec::approxeig

namespace eulerspec::approxeig {

Vec2 choose_base_point(const TrigVelocityField& u, const fields::StagnationPoint& y, double lambda,
                       double delta) {
  if (y.kind != fields::StagnationKind::Hyperbolic)
    throw Error(ErrorKind::InvalidInput, "base point needs a hyperbolic stagnation point");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "offset must be positive");
  if (lambda == 0.0) throw Error(ErrorKind::InvalidInput, "lambda must be nonzero");
  const Mat2& J = y.jacobian;
  const double mu = lambda > 0.0 ? -y.exponent : y.exponent;
  Vec2 a(J(0, 1), mu - J(0, 0)), b(mu - J(1, 1), J(1, 0));
  Vec2 v = a.norm() >= b.norm() ? a : b;
  v.normalize();
  if (std::abs(v.x()) >= std::abs(v.y()) ? v.x() < 0.0 : v.y() < 0.0) v = -v;
  const Vec2 c = y.location.vec();
  // Straight invariant line: u stays parallel to v along it.
  bool straight = true;
  for (int i = 1; i <= 32 && straight; ++i) {
    Vec2 w = u.velocity(c + (delta * i / 32.0) * v);
    straight = std::abs(w.x() * v.y() - w.y() * v.x()) <= 1e-12 * std::max(w.norm(), 1e-300);
  }
  if (straight) return c + delta * v;
  // Otherwise follow the manifold out from y: backward in time along the
  // stable side, forward along the unstable side.
  const double dir = lambda > 0.0 ? -1.0 : 1.0;
  Vec2 x = c + 1e-8 * v;
  const double h = 0.01;
  for (int it = 0; it < 200000; ++it) {
    Vec2 nx = flow::flow_map(u, x, dir * h);
    if ((nx - c).norm() >= delta) {
      double lo = 0.0, hi = h;
      for (int k = 0; k < 60; ++k) {
        double mid = 0.5 * (lo + hi);
        ((flow::flow_map(u, x, dir * mid) - c).norm() < delta ? lo : hi) = mid;
      }
      return flow::flow_map(u, x, dir * 0.5 * (lo + hi));
    }
    x = nx;
  }
  throw Error(ErrorKind::IntegrationFailure, "manifold did not reach the requested offset");
}

StripSamples build_F(Complex alpha, const BumpProfile& profile, const flow::StripChart& chart) {
  StripSamples out;
  const std::size_t nt = chart.t.size(), ns = chart.tau.size();
  out.F.resize(nt * ns);
  out.Ft.resize(nt * ns);
  std::vector<double> b(ns);
  for (std::size_t j = 0; j < ns; ++j) b[j] = profile.beta(chart.tau[j]);
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = chart.t[i];
    const Complex e = std::exp(alpha * t);
    const double g = profile.gamma(t), dg = profile.dgamma(t);
    for (std::size_t j = 0; j < ns; ++j) {
      out.F[i * ns + j] = e * g * b[j];
      out.Ft[i * ns + j] = e * dg * b[j];
    }
  }
  return out;
}

namespace {

// Trapezoid weights of the chart lattice, including (2 pi)^-2.
std::vector<double> lattice_weights(const flow::StripChart& chart) {
  const std::size_t nt = chart.t.size(), ns = chart.tau.size();
  std::vector<double> w(nt * ns);
  const double base = chart.dt() * chart.dtau() / (kTwoPi * kTwoPi);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < ns; ++j)
      w[i * ns + j] = base * (i == 0 || i + 1 == nt ? 0.5 : 1.0) * (j == 0 || j + 1 == ns ? 0.5 : 1.0);
  return w;
}

}  // namespace

Synthesis synthesize(const flow::StripChart& chart, const std::vector<Complex>& F, int M, int m,
                     kernels::Exec exec) {
  if (F.size() != chart.samples.size()) throw Error(ErrorKind::InvalidInput, "samples do not match the chart");
  auto w = lattice_weights(chart);
  std::vector<Vec2> pts(F.size());
  std::vector<Complex> wf(F.size());
  Synthesis s;
  for (std::size_t i = 0; i < F.size(); ++i) {
    pts[i] = chart.samples[i].h;
    wf[i] = w[i] * F[i];
    s.mean += wf[i];
  }
  s.field = FourierScalarField(fields::ModeBox(M), kernels::nudft(pts, wf, M, exec));
  double n2 = s.field.sobolev_norm(m);
  s.tail = n2 > 0.0 ? s.field.tail_fraction(m, 2.0 * M / 3.0) : 0.0;
  s.certificate_valid = chart.injectivity_ok && s.tail <= kTailLimit && n2 > 0.0;
  return s;
}

namespace {

ApproxEigenfunction normalized(FourierScalarField g, int m, double tail, bool valid) {
  ApproxEigenfunction a;
  a.m = m;
  a.scale = g.sobolev_norm(m);
  if (!(a.scale > 0.0)) throw Error(ErrorKind::Symmetrization, "approximate eigenfunction vanishes");
  g *= 1.0 / a.scale;
  a.field = std::move(g);
  a.tail = tail;
  a.certificate_valid = valid;
  return a;
}

// Largest distance between lattice neighbours, a resolution scale.
double lattice_spacing(const flow::StripChart& c) {
  double r = 0.0;
  const std::size_t nt = c.t.size(), ns = c.tau.size();
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < ns; ++j) {
      if (i + 1 < nt) r = std::max(r, (c.at(i + 1, j).h - c.at(i, j).h).norm());
      if (j + 1 < ns) r = std::max(r, (c.at(i, j + 1).h - c.at(i, j).h).norm());
    }
  return r;
}

bool clouds_touch(const flow::StripChart& a, const flow::StripChart& b, double r) {
  const int cells = std::max(1, std::min(4096, int(kTwoPi / r)));
  const double h = kTwoPi / cells;
  std::unordered_multimap<long, Vec2> grid;
  auto key = [&](int i, int j) { return long(((i % cells) + cells) % cells) * cells + ((j % cells) + cells) % cells; };
  for (const auto& s : a.samples) {
    Vec2 p(wrap_angle(s.h.x()), wrap_angle(s.h.y()));
    grid.emplace(key(int(p.x() / h), int(p.y() / h)), p);
  }
  for (const auto& s : b.samples) {
    Vec2 p(wrap_angle(s.h.x()), wrap_angle(s.h.y()));
    int ci = int(p.x() / h), cj = int(p.y() / h);
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        auto range = grid.equal_range(key(ci + di, cj + dj));
        for (auto it = range.first; it != range.second; ++it)
          if (torus_distance(it->second, p) < r) return true;
      }
  }
  return false;
}

}  // namespace

ApproxEigenfunction symmetrize(const Synthesis& f, int m) {
  auto a = normalized(f.field, m, f.tail, f.certificate_valid);
  a.mean = f.mean;
  return a;
}

ApproxEigenfunction symmetrize(const Synthesis& f, const flow::StripChart& chart_f,
                               const Synthesis& fbar, const flow::StripChart& chart_fbar,
                               double offset, int m) {
  if (!(f.field.box() == fbar.field.box())) throw Error(ErrorKind::InvalidInput, "partner box differs");
  const double r = std::max(lattice_spacing(chart_f), lattice_spacing(chart_fbar));
  if (clouds_touch(chart_f, chart_fbar, r))
    throw Error(ErrorKind::Symmetrization, "partner strip overlaps the strip of f");
  Complex weight = std::abs(fbar.mean) > 0.0 ? f.mean / fbar.mean : Complex(1.0);
  auto g = f.field;
  auto scaled = fbar.field;
  scaled *= weight;
  g -= scaled;
  double tail = g.sobolev_norm(m) > 0.0 ? g.tail_fraction(m, 2.0 * g.max_index() / 3.0) : 0.0;
  auto a = normalized(std::move(g), m, tail, f.certificate_valid && fbar.certificate_valid && tail <= kTailLimit);
  a.partner_weight = weight;
  a.partner_offset = offset;
  a.mean = f.mean - weight * fbar.mean;
  return a;
}

ResidualBreakdown residual(const TrigVelocityField& u, Complex z, const FourierScalarField& g, int m) {
  const double n = g.sobolev_norm(m);
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidInput, "residual of a zero field");
  auto Ag = operators::apply_A(u, g);
  auto Kg = operators::apply_K(u, g);
  auto zg = g;
  zg *= z;
  ResidualBreakdown r;
  auto adv = zg;
  adv *= -1.0;
  adv -= Ag;  // (-A - z) g
  r.advective = adv.sobolev_norm(m) / n;
  r.kg = Kg.sobolev_norm(m) / n;
  adv += Kg;
  r.residual = adv.sobolev_norm(m) / n;
  return r;
}

ResidualBreakdown residual(const TrigVelocityField& u, Complex z, const ApproxEigenfunction& g) {
  if (!g.certificate_valid)
    throw Error(ErrorKind::InvalidCertificate, "certificate invalid (tail " + std::to_string(g.tail) + ")");
  return residual(u, z, g.field, g.m);
}

double predicted_bound(const TrigVelocityField& u, const Vec2& x0, double lambda, int m,
                       const BumpProfile& profile, int samples_per_unit) {
  const double N = profile.N();
  const int n = std::max(2, int(std::ceil(2.0 * N * samples_per_unit)));
  flow::Trajectory fwd, bwd;
  if (m != 0) {
    fwd = flow::advance(u, x0, N);
    bwd = flow::advance(u, x0, -N);
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = -N + 2.0 * N * i / n;
    double w = i == 0 || i == n ? 0.5 : 1.0;
    if (m != 0) {
      Vec2 x = t >= 0.0 ? fwd.at(t) : bwd.at(t);
      w *= std::pow(u.velocity(x).norm(), 2.0 * m) * std::exp(2.0 * m * lambda * t);
    }
    const double g = profile.gamma(t), dg = profile.dgamma(t);
    num += w * dg * dg;
    den += w * g * g;
  }
  return std::sqrt(num / den);
}

}  // namespace eulerspec::approxeig

// ---------------------------------------------------------------------------

namespace eulerspec::approxeig {

namespace {

Vec2 hyperbolic_base(const TrigVelocityField& u, const SweepSpec& spec) {
  auto an = fields::find_stagnation_points(u);
  const fields::StagnationPoint* best = nullptr;
  for (const auto& p : an.points)
    if (p.kind == fields::StagnationKind::Hyperbolic &&
        (!best || p.location.vec().norm() < best->location.vec().norm()))
      best = &p;
  if (!best) throw Error(ErrorKind::Precondition, "flow '" + spec.flow + "' has no hyperbolic stagnation point");
  return choose_base_point(u, *best, spec.lambda, spec.delta);
}

// Point of a long orbit where |u| is largest along it.
Vec2 long_orbit_base(const TrigVelocityField& u, const SweepSpec& spec, double target) {
  auto scan = orbits::longest_orbit_scan(u, target, spec.orbit_grid, 1.2 * target + 1.0);
  orbits::PeriodEstimate pick;
  if (scan.found) {
    pick = scan.witness;
  } else {
    double best = -1.0;
    for (const auto& p : scan.samples)
      if (!p.stagnation && !p.infinite() && p.period > best) best = p.period, pick = p;
    if (best < 0.0) throw Error(ErrorKind::Precondition, "no periodic seed found");
  }
  if (pick.infinite() || pick.stagnation) return pick.point.vec();
  auto tr = flow::advance(u, pick.point.vec(), pick.period);
  Vec2 x = pick.point.vec();
  double vmax = u.velocity(x).norm();
  for (int i = 1; i < 2000; ++i) {
    Vec2 y = tr.at(pick.period * i / 2000.0);
    double v = u.velocity(y).norm();
    if (v > vmax) vmax = v, x = y;
  }
  return x;
}

// Relative H_m mismatch between (-A - z) g and the synthesis of -Ft,
// scaled like g (the constant z c lives in the dropped (0,0) mode).
double a_action_error(const TrigVelocityField& u, Complex z, const ApproxEigenfunction& g,
                      FourierScalarField ft) {
  auto adv = operators::apply_A(u, g.field);
  adv *= -1.0;
  auto zg = g.field;
  zg *= z;
  adv -= zg;
  ft *= -1.0 / g.scale;
  const double den = ft.sobolev_norm(g.m);
  adv -= ft;
  return den > 0.0 ? adv.sobolev_norm(g.m) / den : std::numeric_limits<double>::quiet_NaN();
}

void append_note(std::string& note, const std::string& s) {
  if (!note.empty()) note += "; ";
  note += s;
}

}  // namespace

ResidualReport sweep(const SweepSpec& spec) {
  if (spec.N.empty() || spec.xi.empty()) throw Error(ErrorKind::InvalidInput, "sweep needs N and xi values");
  if (spec.m < 0) throw Error(ErrorKind::InvalidInput, "m must be nonnegative");
  const auto u = fields::preset(spec.flow);
  const bool hyperbolic = spec.theorem == TheoremCase::Hyperbolic;
  const bool partner = spec.symmetrization == Symmetrization::Partner;
  const double lambda = hyperbolic ? spec.lambda : 0.0;
  ResidualReport report;

  for (double N : spec.N) {
    std::vector<double> s_list = spec.s;
    if (s_list.empty()) s_list.push_back(spec.s_scale * 6.0 / N);
    const double offset = 2.0 * N + spec.partner_gap;

    std::string base_note;
    Vec2 x0 = Vec2::Zero();
    bool have_base = true;
    try {
      x0 = hyperbolic ? hyperbolic_base(u, spec)
                      : long_orbit_base(u, spec, partner ? 1.05 * (2.0 * offset) : 3.0 * N);
    } catch (const Error& e) {
      have_base = false;
      base_note = std::string("base point: ") + e.what();
    }

    for (double s : s_list) {
      std::vector<ResidualRow> rows;
      for (double xi : spec.xi) {
        ResidualRow r;
        r.scenario = spec.scenario;
        r.m = spec.m;
        r.lambda = lambda;
        r.xi = xi;
        r.N = N;
        r.s = s;
        r.z = -Complex(spec.m * lambda, xi);
        r.strip_area = 4.0 * N * s;
        r.base = x0;
        r.note = base_note;
        rows.push_back(std::move(r));
      }
      auto flush = [&] {
        for (auto& r : rows) report.rows.push_back(std::move(r));
      };
      if (!have_base) {
        flush();
        continue;
      }

      flow::StripChart chart, pchart;
      std::optional<BumpProfile> profile;
      try {
        profile.emplace(make_profiles(N, s, spec.m, spec.beta));
        chart = flow::build_chart(u, x0, N, s, spec.chart);
        if (partner) pchart = flow::build_chart(u, flow::flow_map(u, x0, offset), N, s, spec.chart);
      } catch (const Error& e) {
        for (auto& r : rows) append_note(r.note, e.what());
        flush();
        continue;
      }
      double predicted = predicted_bound(u, x0, lambda, spec.m, *profile);

      for (auto& r : rows) {
        r.injectivity_ok = chart.injectivity_ok && (!partner || pchart.injectivity_ok);
        r.period_ok = chart.period_ok;
        r.predicted = predicted;
        if (!chart.injectivity_ok) append_note(r.note, "chart not injective");
        if (!chart.period_ok) append_note(r.note, "period " + std::to_string(chart.period) + " too short");
        try {
          const Complex alpha = -r.z;
          auto S = build_F(alpha, *profile, chart);
          auto f = synthesize(chart, S.F, spec.M, spec.m, spec.exec);
          auto ft = synthesize(chart, S.Ft, spec.M, spec.m, spec.exec).field;
          ApproxEigenfunction g;
          bool symmetrized = false;
          if (partner) {
            try {
              auto Sb = build_F(alpha, *profile, pchart);
              auto fb = synthesize(pchart, Sb.F, spec.M, spec.m, spec.exec);
              g = symmetrize(f, chart, fb, pchart, offset, spec.m);
              auto ftb = synthesize(pchart, Sb.Ft, spec.M, spec.m, spec.exec).field;
              ftb *= g.partner_weight;
              ft -= ftb;
              symmetrized = true;
            } catch (const Error& e) {
              append_note(r.note, std::string(e.what()) + ", mean projection used");
              r.injectivity_ok = chart.injectivity_ok;
            }
          }
          if (!symmetrized) g = symmetrize(f, spec.m);
          r.tail = g.tail;
          r.certificate_valid = g.certificate_valid && chart.injectivity_ok && !(partner && !symmetrized);
          if (!g.certificate_valid) append_note(r.note, "tail " + std::to_string(g.tail));
          auto rb = residual(u, r.z, g.field, spec.m);
          r.residual = rb.residual;
          r.advective = rb.advective;
          r.kg_norm = rb.kg;
          r.a_action_error = a_action_error(u, r.z, g, std::move(ft));
        } catch (const Error& e) {
          r.certificate_valid = false;
          append_note(r.note, e.what());
        }
      }
      flush();
    }
  }
  report.trend = summarize(report.rows);
  return report;
}

TrendSummary summarize(const std::vector<ResidualRow>& rows) {
  TrendSummary t;
  // xi -> N -> residuals (one slot per s, largest s first).
  std::map<double, std::map<double, std::vector<std::pair<double, double>>>> by_xi;
  std::map<std::pair<double, double>, std::vector<double>> by_ns;
  for (const auto& r : rows) {
    const bool flagged = !r.certificate_valid || !r.injectivity_ok || !r.period_ok || !r.note.empty();
    if (flagged) ++t.flagged_rows;
    if (!std::isfinite(r.residual)) continue;
    by_xi[r.xi][r.N].emplace_back(-r.s, r.residual);
    by_ns[{r.N, r.s}].push_back(r.residual);
    if (r.predicted > 0.0) t.max_ratio_to_predicted = std::max(t.max_ratio_to_predicted, r.residual / r.predicted);
  }
  for (auto& [xi, byN] : by_xi) {
    std::vector<std::vector<double>> slots;
    for (auto& [N, v] : byN) {
      std::sort(v.begin(), v.end());
      if (slots.size() < v.size()) slots.resize(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) slots[j].push_back(v[j].second);
    }
    for (const auto& seq : slots)
      for (std::size_t i = 1; i < seq.size(); ++i)
        if (!(seq[i] < seq[i - 1])) t.decreasing_in_N = false;
  }
  for (const auto& [key, v] : by_ns) {
    if (v.size() < 2) continue;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi > 0.0) t.max_xi_variation = std::max(t.max_xi_variation, (*hi - *lo) / *hi);
  }
  return t;
}

SweepSpec named_sweep(const std::string& name) {
  SweepSpec s;
  s.scenario = name;
  if (name == "cellular-hyperbolic") {
    s.flow = "cellular";
    s.theorem = TheoremCase::Hyperbolic;
    s.m = 1;
    s.lambda = 1.0;
    s.xi = {0.0, 0.7, 2.0};
    s.N = {4, 6, 8};
    s.beta = BetaVariant::Appendix;
    s.symmetrization = Symmetrization::MeanProjection;
    return s;
  }
  if (name == "shear-long-orbit" || name == "rigid-lattice") {
    s.flow = name == "shear-long-orbit" ? "shear" : "rigid";
    s.theorem = TheoremCase::LongOrbit;
    s.m = 0;
    s.lambda = 0.0;
    s.xi = {name == "shear-long-orbit" ? 0.37 : 0.5};
    s.N = {5, 10, 20};
    s.s = {0.02};
    s.beta = BetaVariant::Indicator;
    s.symmetrization = Symmetrization::Partner;
    return s;
  }
  throw Error(ErrorKind::InvalidInput, "unknown sweep '" + name + "'");
}

std::vector<std::string> sweep_names() { return {"cellular-hyperbolic", "shear-long-orbit", "rigid-lattice"}; }

void write_report_csv(std::ostream& os, const ResidualReport& report) {
  const auto old = os.precision(17);
  os << "scenario,m,lambda,xi,N,s,residual,predicted,kg_norm,tail,inj\n";
  for (const auto& r : report.rows)
    os << r.scenario << ',' << r.m << ',' << r.lambda << ',' << r.xi << ',' << r.N << ',' << r.s << ','
       << r.residual << ',' << r.predicted << ',' << r.kg_norm << ',' << r.tail << ',' << (r.injectivity_ok ? 1 : 0)
       << '\n';
  os.precision(old);
}

}  // namespace eulerspec::approxeig
