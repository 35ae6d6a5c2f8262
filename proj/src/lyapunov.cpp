#include "eulerspec/lyapunov.hpp"

#include <algorithm>
#include <ostream>
#include <random>

#include "detail/norm_tracker.hpp"
#include "detail/rk4.hpp"

namespace eulerspec::lyapunov {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two points to fit");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

ExponentEstimate exponent_at(const TrigVelocityField& u, const Vec2& x0, double T,
                             const LyapunovOptions& opt) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, "horizon must be positive");
  if (!(opt.reorth_interval > 0.0)) throw Error(ErrorKind::InvalidInput, "reorthonormalization interval must be positive");
  ExponentEstimate est;
  est.horizon = T;
  detail::NormTracker tr(x0);
  std::vector<double> ts, ls;
  const double fit_from = (1.0 - opt.fit_fraction) * T;
  while (tr.time() < T - 1e-12) {
    tr.advance(u, std::min(opt.reorth_interval, T - tr.time()), opt.step);
    double L = tr.log_norm();
    est.trace.push_back({tr.time(), L / tr.time()});
    if (tr.time() >= fit_from - 1e-12) {
      ts.push_back(tr.time());
      ls.push_back(L);
    }
  }
  est.value = ts.size() >= 2 ? fit_slope(ts, ls) : est.trace.back().second;
  return est;
}

std::vector<double> stagnation_exponents(const TrigVelocityField& u) {
  std::vector<double> out;
  if (u.is_zero()) return out;
  auto a = fields::find_stagnation_points(u);
  for (const auto& p : a.points) {
    if (p.kind == fields::StagnationKind::Hyperbolic) {
      out.push_back(p.exponent);
      out.push_back(-p.exponent);
    } else {
      out.push_back(0.0);
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  for (double v : out)
    if (dedup.empty() || v - dedup.back() > 1e-10) dedup.push_back(v);
  return dedup;
}

GlobalExponent global_exponent(const TrigVelocityField& u, double T, int grid_size,
                               const LyapunovOptions& opt) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, "horizon must be positive");
  if (grid_size < 16) throw Error(ErrorKind::InvalidInput, "grid size must be at least 16");
  GlobalExponent g;
  g.grid = grid_size;
  g.horizon = T;
  const double h = kTwoPi / grid_size;
  std::vector<Vec2> pts;
  pts.reserve(std::size_t(grid_size) * grid_size);
  for (int i = 0; i < grid_size; ++i)
    for (int j = 0; j < grid_size; ++j) pts.emplace_back(i * h, j * h);
  // Same fit as exponent_at: least-squares slope over the last fit_fraction
  // of [0, T], sampled at 17 times.
  const int nfit = 17;
  std::vector<double> times(nfit);
  for (int k = 0; k < nfit; ++k) times[k] = T * (1.0 - opt.fit_fraction * (nfit - 1 - k) / (nfit - 1));
  if (times.front() <= 0.0) times.erase(times.begin());
  auto logs = kernels::log_norm_at(u, pts, times, opt.reorth_interval, opt.step, opt.exec);
  const std::size_t nt = times.size();
  g.field.resize(pts.size());
  g.grid_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> y(logs.begin() + long(i * nt), logs.begin() + long((i + 1) * nt));
    g.field[i] = nt > 1 ? fit_slope(times, y) : y[0] / T;
    if (g.field[i] > g.grid_value) {
      g.grid_value = g.field[i];
      g.grid_argmax = TorusPoint(pts[i]);
    }
  }
  if (!u.is_zero()) {
    auto a = fields::find_stagnation_points(u);
    for (const auto& p : a.points)
      if (p.kind == fields::StagnationKind::Hyperbolic) {
        g.has_stagnation = true;
        g.stagnation_value = std::max(g.stagnation_value, p.exponent);
      }
  }
  if (g.has_stagnation && g.stagnation_value >= g.grid_value) {
    g.value = g.stagnation_value;
    g.provenance = "stagnation";
  } else {
    g.value = g.grid_value;
    g.provenance = "grid";
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

using V6 = Eigen::Matrix<double, 6, 1>;

struct BasRhs {
  const TrigVelocityField& u;
  V6 operator()(const V6& y) const {
    Vec2 v;
    Mat2 J;
    u.jet1(y.head<2>(), v, J);
    Vec2 xi = y.segment<2>(2), b = y.segment<2>(4);
    Vec2 Jb = J * b;
    V6 r;
    r.head<2>() = v;
    r.segment<2>(2) = -J.transpose() * xi;
    r.segment<2>(4) = -Jb + 2.0 * Jb.dot(xi) / xi.squaredNorm() * xi;
    return r;
  }
};

}  // namespace

BasTrajectory bas_trajectory(const TrigVelocityField& u, const Vec2& x0, const Vec2& xi0,
                             const Vec2& b0, double T, const BasOptions& opt) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, "horizon must be positive");
  if (std::abs(xi0.norm() - 1.0) > 1e-12 || std::abs(b0.norm() - 1.0) > 1e-12 ||
      std::abs(xi0.dot(b0)) > 1e-12)
    throw Error(ErrorKind::InvalidInput, "need |xi0| = |b0| = 1 and xi0 orthogonal to b0");
  opt.step.validate();
  BasTrajectory tr;
  V6 y;
  y << x0, xi0, b0;
  double lxi = 0.0, lb = 0.0;
  BasRhs f{u};
  auto record = [&](double t) {
    Vec2 xs = y.segment<2>(2), bs = y.segment<2>(4);
    BasSample s;
    s.t = t;
    s.x = y.head<2>();
    s.xi = xs * std::exp(lxi);
    s.b = bs * std::exp(lb);
    s.integral = xs.norm() * bs.norm() * std::exp(lxi + lb);
    tr.samples.push_back(s);
  };
  record(0.0);
  const double I0 = tr.samples.front().integral;
  double t = 0.0;
  while (t < T - 1e-12) {
    double dt = std::min(opt.sample_interval, T - t);
    y = flow::detail::integrate(f, y, dt, opt.step);
    t += dt;
    double nx = y.segment<2>(2).norm(), nb = y.segment<2>(4).norm();
    if (!(nx > 0.0) || !std::isfinite(nx) || !(nb > 0.0) || !std::isfinite(nb))
      flow::detail::integration_failure(y, t, "degenerate amplitude");
    if (nx > opt.renorm_limit || nx < 1.0 / opt.renorm_limit) {
      y.segment<2>(2) /= nx;
      lxi += std::log(nx);
      ++tr.renormalizations;
    }
    if (nb > opt.renorm_limit || nb < 1.0 / opt.renorm_limit) {
      y.segment<2>(4) /= nb;
      lb += std::log(nb);
      ++tr.renormalizations;
    }
    record(t);
    tr.first_integral_drift = std::max(tr.first_integral_drift, std::abs(tr.samples.back().integral - I0) / I0);
  }
  tr.log_xi = lxi + std::log(y.segment<2>(2).norm());
  tr.log_b = lb + std::log(y.segment<2>(4).norm());
  return tr;
}

std::vector<BasInitial> make_bas_samples(const TrigVelocityField& u, const BasSampleSpec& spec) {
  std::vector<BasInitial> out;
  if (spec.include_stagnation && !u.is_zero()) {
    auto a = fields::find_stagnation_points(u);
    for (const auto& p : a.points) {
      if (p.kind != fields::StagnationKind::Hyperbolic) continue;
      // Eigenvector of Du^T for +lambda: -Du^T contracts xi along it, so b
      // (with |b||xi| conserved) grows like e^{lambda t}.
      Mat2 A = p.jacobian.transpose();
      double lam = p.exponent;
      Vec2 v;
      if (std::abs(A(0, 1)) > 1e-12)
        v = Vec2(A(0, 1), lam - A(0, 0));
      else if (std::abs(A(1, 0)) > 1e-12)
        v = Vec2(lam - A(1, 1), A(1, 0));
      else
        v = std::abs(A(0, 0) - lam) < std::abs(A(1, 1) - lam) ? Vec2(1, 0) : Vec2(0, 1);
      v.normalize();
      out.push_back({p.location.vec(), v, perp(v)});
    }
  }
  if (out.size() > spec.count) out.resize(spec.count);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  while (out.size() < spec.count) {
    Vec2 x(U(rng), U(rng));
    double th = U(rng);
    Vec2 xi(std::cos(th), std::sin(th));
    out.push_back({x, xi, perp(xi)});
  }
  return out;
}

namespace {

std::vector<BasTrajectory> run_samples(const TrigVelocityField& u, const std::vector<BasInitial>& init,
                                       double T, const BasOptions& opt) {
  std::vector<BasTrajectory> out(init.size());
  BasOptions light = opt;
  light.sample_interval = std::max(opt.sample_interval, 0.5);
  const long n = long(init.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& s = init[std::size_t(i)];
    out[std::size_t(i)] = bas_trajectory(u, s.x, s.xi, s.b, T, light);
  }
  return out;
}

double log1p_exp2(double l) {
  // log(1 + e^{2l}) without overflow.
  double a = 2.0 * l;
  return a > 30.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

}  // namespace

BasExponent weighted_b_exponent(const TrigVelocityField& u, int m, const BasSampleSpec& spec,
                                double T, const BasOptions& opt) {
  if (spec.count == 0) throw Error(ErrorKind::InvalidInput, "need at least one sample");
  auto init = make_bas_samples(u, spec);
  auto runs = run_samples(u, init, T, opt);
  BasExponent e;
  e.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    // Relative to the weight at t = 0 (|xi0| = 1); same limit, no 1/T bias.
    double w = m == 0 ? 0.0 : 0.5 * double(m) * (log1p_exp2(runs[i].log_xi) - std::log(2.0));
    double v = (w + runs[i].log_b) / T;
    e.per_sample.push_back(v);
    if (v > e.value) e.value = v, e.argmax = i;
  }
  return e;
}

BasExponent bas_max_exponent(const TrigVelocityField& u, const BasSampleSpec& spec, double T,
                             const BasOptions& opt) {
  return weighted_b_exponent(u, 0, spec, T, opt);
}

// ---------------------------------------------------------------------------

HigherNormGrowth higher_norm_growth(const TrigVelocityField& u, int m, double T, int grid_size,
                                    const LyapunovOptions& opt) {
  if (m != 1 && m != 2) throw Error(ErrorKind::InvalidInput, "only m = 1 and m = 2 are implemented");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, "horizon must be positive");
  if (grid_size < 2) throw Error(ErrorKind::InvalidInput, "grid size must be at least 2");
  HigherNormGrowth r;
  r.m = m;
  const double h = kTwoPi / grid_size;
  std::vector<Vec2> pts;
  for (int i = 0; i < grid_size; ++i)
    for (int j = 0; j < grid_size; ++j) pts.emplace_back(i * h, j * h);
  std::vector<double> times;
  for (int k = 1; k <= 10; ++k) times.push_back(T * k / 10.0);
  times.back() = T;
  auto logs = m == 1 ? kernels::log_norm_at(u, pts, times, opt.reorth_interval, opt.step, opt.exec)
                     : kernels::log_second_norm_at(u, pts, times, opt.step, opt.exec);
  const std::size_t nt = times.size();
  for (std::size_t k = 0; k < nt; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pts.size(); ++p) best = std::max(best, logs[p * nt + k]);
    r.trace.push_back({times[k], best / times[k]});
  }
  double last = r.trace.back().second;
  if (std::isinf(last) && last < 0) {
    r.vanishing = true;
    r.value = 0.0;
  } else {
    r.value = last;
  }
  return r;
}

void write_exponent_field_csv(std::ostream& os, const GlobalExponent& g) {
  auto old = os.precision(17);
  os << "x1,x2,lambda1\n";
  const double h = kTwoPi / g.grid;
  for (int i = 0; i < g.grid; ++i)
    for (int j = 0; j < g.grid; ++j)
      os << i * h << ',' << j * h << ',' << g.field[std::size_t(i) * g.grid + j] << '\n';
  os.precision(old);
}

void write_bas_csv(std::ostream& os, const BasTrajectory& tr) {
  auto old = os.precision(17);
  os << "t,b1,b2,xi1,xi2,integral\n";
  for (const auto& s : tr.samples)
    os << s.t << ',' << s.b.x() << ',' << s.b.y() << ',' << s.xi.x() << ',' << s.xi.y() << ','
       << s.integral << '\n';
  os.precision(old);
}

}  // namespace eulerspec::lyapunov
