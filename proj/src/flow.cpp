#include "eulerspec/flow.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "detail/rk4.hpp"
#include "eulerspec/orbits.hpp"

namespace eulerspec::flow {

using detail::integrate;
using detail::rk4_step;
using V2 = Eigen::Matrix<double, 2, 1>;
using V6 = Eigen::Matrix<double, 6, 1>;
using V14 = Eigen::Matrix<double, 14, 1>;

void StepControl::validate() const {
  if (!(step > 0.0) || !std::isfinite(step))
    throw Error(ErrorKind::InvalidInput, "step must be positive");
  if (adaptive && (!(rtol > 0.0) || !(atol > 0.0) || !(min_step > 0.0) || !(max_step >= min_step)))
    throw Error(ErrorKind::InvalidInput, "invalid adaptive step control");
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::vector<double> times, std::vector<Vec2> positions,
                       std::vector<Vec2> velocities)
    : times_(std::move(times)), positions_(std::move(positions)), velocities_(std::move(velocities)) {
  if (times_.empty() || times_.size() != positions_.size() || times_.size() != velocities_.size())
    throw Error(ErrorKind::InvalidInput, "inconsistent trajectory samples");
}

Vec2 Trajectory::at(double t) const {
  const bool forward = times_.back() >= times_.front();
  double lo = std::min(times_.front(), times_.back()), hi = std::max(times_.front(), times_.back());
  if (t < lo - 1e-12 || t > hi + 1e-12)
    throw Error(ErrorKind::InvalidInput, "time outside the integrated interval");
  std::size_t n = times_.size();
  if (n == 1) return positions_[0];
  // Index of the interval [times_[i], times_[i+1]] containing t.
  std::size_t i;
  if (forward) {
    i = std::size_t(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  } else {
    i = std::size_t(std::upper_bound(times_.begin(), times_.end(), t, std::greater<>()) - times_.begin());
  }
  i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, n - 2);
  double t0 = times_[i], t1 = times_[i + 1];
  double h = t1 - t0;
  double th = (t - t0) / h;
  double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
  double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
  return h00 * positions_[i] + h10 * h * velocities_[i] + h01 * positions_[i + 1] +
         h11 * h * velocities_[i + 1];
}

Trajectory advance(const TrigVelocityField& u, const Vec2& x0, double t, const StepControl& sc) {
  sc.validate();
  if (!std::isfinite(t)) throw Error(ErrorKind::InvalidInput, "integration time must be finite");
  const double sigma = t < 0.0 ? -1.0 : 1.0;
  auto f = [&](const V2& y) -> V2 { return sigma * u.velocity(y); };
  std::vector<double> times{0.0};
  std::vector<Vec2> pos{x0};
  std::vector<Vec2> vel{u.velocity(x0)};
  const double duration = std::abs(t);
  V2 y = x0;
  if (!sc.adaptive) {
    long n = std::max(1L, long(std::ceil(duration / sc.step - 1e-9)));
    if (duration == 0.0) n = 0;
    double h = n > 0 ? duration / double(n) : 0.0;
    times.reserve(std::size_t(n) + 1);
    pos.reserve(std::size_t(n) + 1);
    vel.reserve(std::size_t(n) + 1);
    for (long i = 0; i < n; ++i) {
      V2 next = rk4_step(f, y, h);
      if (!next.allFinite()) detail::integration_failure(y, double(i) * h, "non-finite state");
      y = next;
      times.push_back(sigma * double(i + 1) * h);
      pos.push_back(y);
      vel.push_back(u.velocity(y));
    }
  } else {
    // Record after every accepted chunk of the nominal step.
    double s = 0.0;
    while (s < duration) {
      double h = std::min(sc.step, duration - s);
      y = integrate(f, y, h, sc);
      s += h;
      times.push_back(sigma * s);
      pos.push_back(y);
      vel.push_back(u.velocity(y));
    }
  }
  return Trajectory(std::move(times), std::move(pos), std::move(vel));
}

Vec2 flow_map(const TrigVelocityField& u, const Vec2& x0, double t, const StepControl& sc) {
  sc.validate();
  const double sigma = t < 0.0 ? -1.0 : 1.0;
  auto f = [&](const V2& y) -> V2 { return sigma * u.velocity(y); };
  return integrate(f, V2(x0), std::abs(t), sc);
}

// ---------------------------------------------------------------------------

namespace {

V6 pack(const CocycleState& s) {
  V6 y;
  y << s.position, s.M(0, 0), s.M(0, 1), s.M(1, 0), s.M(1, 1);
  return y;
}

V14 pack2(const CocycleState& s) {
  V14 y;
  y.head<6>() = pack(s);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) y(6 + 4 * i + 2 * j + k) = s.M2[i](j, k);
  return y;
}

template <class V>
void unpack(const V& y, CocycleState& s) {
  s.position = y.template head<2>();
  s.M << y(2), y(3), y(4), y(5);
  if constexpr (V::RowsAtCompileTime == 14) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) s.M2[i](j, k) = y(6 + 4 * i + 2 * j + k);
  }
}

struct TangentRhs {
  const TrigVelocityField& u;
  double sigma;
  V6 operator()(const V6& y) const {
    Vec2 v;
    Mat2 J;
    u.jet1(y.head<2>(), v, J);
    Mat2 M;
    M << y(2), y(3), y(4), y(5);
    Mat2 dM = J * M;
    V6 r;
    r << v, dM(0, 0), dM(0, 1), dM(1, 0), dM(1, 1);
    return sigma * r;
  }
};

struct SecondRhs {
  const TrigVelocityField& u;
  double sigma;
  V14 operator()(const V14& y) const {
    fields::VelocityJet jet = u.eval(y.head<2>(), 2);
    Mat2 M;
    M << y(2), y(3), y(4), y(5);
    Mat2 dM = jet.jacobian * M;
    V14 r;
    r.head<2>() = jet.value;
    r(2) = dM(0, 0), r(3) = dM(0, 1), r(4) = dM(1, 0), r(5) = dM(1, 1);
    // d/dt M2_i(j,k) = sum_l Du_il M2_l(j,k) + sum_{l,n} D2u_i(l,n) M_lj M_nk
    for (int i = 0; i < 2; ++i) {
      Mat2 src = M.transpose() * jet.hessian[i] * M;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double acc = src(j, k);
          for (int l = 0; l < 2; ++l) acc += jet.jacobian(i, l) * y(6 + 4 * l + 2 * j + k);
          r(6 + 4 * i + 2 * j + k) = acc;
        }
    }
    return sigma * r;
  }
};

}  // namespace

CocycleState continue_tangent(const TrigVelocityField& u, const CocycleState& start, double dt,
                              const StepControl& sc) {
  sc.validate();
  if (!std::isfinite(dt)) throw Error(ErrorKind::InvalidInput, "integration time must be finite");
  TangentRhs f{u, dt < 0.0 ? -1.0 : 1.0};
  V6 y = integrate(f, pack(start), std::abs(dt), sc);
  CocycleState out = start;
  unpack(y, out);
  out.time = start.time + dt;
  out.has_second = false;
  return out;
}

CocycleState tangent_flow(const TrigVelocityField& u, const Vec2& x0, double t, const StepControl& sc) {
  CocycleState s;
  s.position = x0;
  return continue_tangent(u, s, t, sc);
}

std::vector<CocycleState> tangent_path(const TrigVelocityField& u, const Vec2& x0, double t,
                                       double every, const StepControl& sc) {
  if (!(every > 0.0)) throw Error(ErrorKind::InvalidInput, "sampling interval must be positive");
  std::vector<CocycleState> out;
  CocycleState s;
  s.position = x0;
  out.push_back(s);
  const double sigma = t < 0.0 ? -1.0 : 1.0;
  long n = long(std::ceil(std::abs(t) / every - 1e-9));
  for (long i = 1; i <= n; ++i) {
    double target = sigma * std::min(std::abs(t), double(i) * every);
    s = continue_tangent(u, s, target - s.time, sc);
    s.time = target;
    out.push_back(s);
  }
  return out;
}

CocycleState continue_second(const TrigVelocityField& u, const CocycleState& start, double dt,
                             const StepControl& sc) {
  sc.validate();
  if (!std::isfinite(dt)) throw Error(ErrorKind::InvalidInput, "integration time must be finite");
  SecondRhs f{u, dt < 0.0 ? -1.0 : 1.0};
  V14 y = integrate(f, pack2(start), std::abs(dt), sc);
  CocycleState out = start;
  unpack(y, out);
  out.time = start.time + dt;
  out.has_second = true;
  return out;
}

CocycleState second_variation(const TrigVelocityField& u, const Vec2& x0, double t,
                              const StepControl& sc) {
  CocycleState s;
  s.position = x0;
  return continue_second(u, s, t, sc);
}

// ---------------------------------------------------------------------------

namespace {

/// Integrate the transverse field from y over tau-length dtau (signed).
Vec2 transverse_segment(const TrigVelocityField& u, Vec2 y, double dtau, double h, double floor) {
  const double sigma = dtau < 0.0 ? -1.0 : 1.0;
  auto f = [&](const V2& p) -> V2 {
    Vec2 v = u.velocity(p);
    return sigma * perp(v) / v.squaredNorm();
  };
  double remaining = std::abs(dtau);
  while (remaining > 0.0) {
    double speed = u.velocity(y).norm();
    if (speed < floor) {
      std::ostringstream os;
      os.precision(17);
      os << "transverse arc reaches |u| = " << speed << " below floor " << floor << " at ("
         << y.x() << ", " << y.y() << ")";
      throw Error(ErrorKind::StagnationProximity, os.str());
    }
    // Keep the spatial displacement per step at most h.
    double step = std::min(remaining, h * std::min(1.0, speed));
    y = rk4_step(f, V2(y), step);
    remaining -= step;
    if (remaining < 1e-15 * std::abs(dtau)) remaining = 0.0;
  }
  double speed = u.velocity(y).norm();
  if (speed < floor)
    throw Error(ErrorKind::StagnationProximity, "transverse arc ends below the speed floor");
  return y;
}

}  // namespace

Vec2 transverse_flow(const TrigVelocityField& u, const Vec2& x0, double tau, const StepControl& sc,
                     double floor_fraction) {
  sc.validate();
  double floor = floor_fraction * u.max_speed();
  if (u.velocity(x0).norm() < floor)
    throw Error(ErrorKind::StagnationProximity, "base point is within the stagnation floor");
  return transverse_segment(u, x0, tau, std::min(sc.step, 1e-3), floor);
}

// ---------------------------------------------------------------------------

StripChart build_chart(const TrigVelocityField& u, const Vec2& x0, double N, double s,
                       const ChartOptions& opt) {
  if (!(N > 0.0)) throw Error(ErrorKind::InvalidInput, "chart half-length must be positive");
  return build_chart_range(u, x0, -N, N, s, opt);
}

StripChart build_chart_range(const TrigVelocityField& u, const Vec2& x0, double t_lo, double t_hi,
                             double s, const ChartOptions& opt) {
  opt.step.validate();
  if (!(t_lo <= 0.0 && 0.0 <= t_hi && t_hi > t_lo))
    throw Error(ErrorKind::InvalidInput, "chart time range must contain 0");
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidInput, "chart half-width must be positive");
  if (opt.n_tau < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 tau samples");

  const double length = t_hi - t_lo;
  const int n_t = opt.n_t > 0 ? opt.n_t : std::max(400, int(std::ceil(50.0 * length)));
  if (n_t < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 t samples");

  StripChart chart;
  chart.base = TorusPoint(x0);
  chart.s = s;
  chart.t_lo = t_lo;
  chart.t_hi = t_hi;
  chart.t.resize(std::size_t(n_t));
  for (int i = 0; i < n_t; ++i) chart.t[std::size_t(i)] = t_lo + length * double(i) / double(n_t - 1);
  chart.t.back() = t_hi;
  chart.tau.resize(std::size_t(opt.n_tau));
  for (int j = 0; j < opt.n_tau; ++j)
    chart.tau[std::size_t(j)] = -s + 2.0 * s * double(j) / double(opt.n_tau - 1);
  chart.tau.back() = s;

  if (opt.check_period) {
    double need = opt.min_period > 0.0 ? opt.min_period : 1.5 * length;  // 3N when symmetric
    orbits::PeriodEstimate p = orbits::prime_period(u, x0, need * 1.01 + 1.0, 1e-8, opt.step);
    chart.period = p.period;
    chart.period_ok = !p.stagnation && p.period > need;
    if (!chart.period_ok && opt.enforce_period) {
      std::ostringstream os;
      os << "prime period " << p.period << " of the base point does not exceed " << need;
      throw Error(ErrorKind::Precondition, os.str());
    }
  }

  const double floor = opt.floor_fraction * u.max_speed();
  if (u.velocity(x0).norm() < floor)
    throw Error(ErrorKind::StagnationProximity, "base point is within the stagnation floor");
  const double h_tau = std::min(opt.step.step, 1e-3);

  // Transverse base points psi_tau(x0), integrated outward from tau = 0.
  std::vector<Vec2> base(chart.tau.size());
  {
    Vec2 y = x0;
    double cur = 0.0;
    for (std::size_t j = 0; j < chart.tau.size(); ++j) {
      if (chart.tau[j] < 0.0) continue;
      y = transverse_segment(u, y, chart.tau[j] - cur, h_tau, floor);
      cur = chart.tau[j];
      base[j] = y;
    }
    y = x0;
    cur = 0.0;
    for (std::size_t j = chart.tau.size(); j-- > 0;) {
      if (chart.tau[j] >= 0.0) continue;
      y = transverse_segment(u, y, chart.tau[j] - cur, h_tau, floor);
      cur = chart.tau[j];
      base[j] = y;
    }
  }

  chart.samples.resize(chart.t.size() * chart.tau.size());
  const std::size_t nt = chart.t.size(), ntau = chart.tau.size();
  std::size_t first_pos = std::size_t(std::lower_bound(chart.t.begin(), chart.t.end(), 0.0) - chart.t.begin());

  for (std::size_t j = 0; j < ntau; ++j) {
    const Vec2& b = base[j];
    Vec2 ub = u.velocity(b);
    double u2 = ub.squaredNorm();
    Mat2 Q;  // [u / |u|^2, u_perp] at the transverse base point
    Q.col(0) = ub / u2;
    Q.col(1) = perp(ub);
    double detP = (ub.x() * ub.x() + ub.y() * ub.y()) / u2;

    auto record = [&](std::size_t i, const CocycleState& st) {
      ChartSample& cs = chart.samples[i * ntau + j];
      cs.h = st.position;
      cs.dh_inv_t = unimodular_inverse_transpose(st.M) * Q;
      cs.u_perp = perp(u.velocity(st.position));
      cs.det = st.M.determinant() * detP;
    };

    CocycleState st;
    st.position = b;
    for (std::size_t i = first_pos; i < nt; ++i) {
      st = continue_tangent(u, st, chart.t[i] - st.time, opt.step);
      st.time = chart.t[i];
      record(i, st);
    }
    st = CocycleState{};
    st.position = b;
    for (std::size_t i = first_pos; i-- > 0;) {
      st = continue_tangent(u, st, chart.t[i] - st.time, opt.step);
      st.time = chart.t[i];
      record(i, st);
    }
  }

  for (const auto& cs : chart.samples) {
    chart.max_det_error = std::max(chart.max_det_error, std::abs(cs.det - 1.0));
    double ref = cs.u_perp.norm();
    double err = (cs.dh_inv_t.col(1) - cs.u_perp).norm();
    chart.max_perp_error = std::max(chart.max_perp_error, ref > 0.0 ? err / ref : err);
  }

  chart.overlaps = find_overlaps(chart, 0, nt, opt.max_reported_overlaps);
  chart.injectivity_ok = chart.overlaps.empty();
  if (!chart.injectivity_ok && opt.strict_injectivity) {
    std::ostringstream os;
    os.precision(6);
    os << "strip chart is not injective; overlapping (t,tau) pairs:";
    for (const auto& o : chart.overlaps)
      os << " [(" << o.t_a << "," << o.tau_a << ")~(" << o.t_b << "," << o.tau_b << ")]";
    throw Error(ErrorKind::ChartOverlap, os.str());
  }
  return chart;
}

std::vector<ChartOverlap> find_overlaps(const StripChart& chart, std::size_t i0, std::size_t i1,
                                        std::size_t max_reported) {
  std::vector<ChartOverlap> out;
  const std::size_t ntau = chart.tau.size();
  i1 = std::min(i1, chart.t.size());
  if (i1 <= i0 || ntau == 0) return out;
  const double dt = chart.dt(), dtau = chart.dtau();
  const std::size_t count = (i1 - i0) * ntau;
  const int B = std::clamp(int(std::sqrt(double(count))), 16, 512);
  const double hb = kTwoPi / B;

  std::vector<std::vector<std::size_t>> buckets(std::size_t(B) * B);
  std::vector<Vec2> wrapped(count);
  for (std::size_t i = i0; i < i1; ++i)
    for (std::size_t j = 0; j < ntau; ++j) {
      std::size_t a = (i - i0) * ntau + j;
      const Vec2& h = chart.at(i, j).h;
      wrapped[a] = Vec2(wrap_angle(h.x()), wrap_angle(h.y()));
      int bx = std::min(B - 1, int(wrapped[a].x() / hb)), by = std::min(B - 1, int(wrapped[a].y() / hb));
      buckets[std::size_t(bx) * B + std::size_t(by)].push_back(a);
    }

  auto floor_div = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };

  for (std::size_t i = i0; i < i1 && out.size() < max_reported; ++i) {
    for (std::size_t j = 0; j < ntau && out.size() < max_reported; ++j) {
      std::size_t a = (i - i0) * ntau + j;
      const ChartSample& cs = chart.at(i, j);
      Mat2 G = cs.dh_inv_t.transpose();  // DH^{-1}
      Mat2 DH = G.inverse();
      Vec2 et = DH.col(0) * dt, eu = DH.col(1) * dtau;
      Vec2 half = 0.5 * (et.cwiseAbs() + eu.cwiseAbs());
      half = half.cwiseMin(Vec2(kTwoPi, kTwoPi));
      const Vec2& pa = wrapped[a];
      long bx0 = long(std::floor((pa.x() - half.x()) / hb)), bx1 = long(std::floor((pa.x() + half.x()) / hb));
      long by0 = long(std::floor((pa.y() - half.y()) / hb)), by1 = long(std::floor((pa.y() + half.y()) / hb));
      for (long bx = bx0; bx <= bx1 && out.size() < max_reported; ++bx) {
        long qx = floor_div(bx, B);
        long cx = bx - qx * B;
        for (long by = by0; by <= by1 && out.size() < max_reported; ++by) {
          long qy = floor_div(by, B);
          long cy = by - qy * B;
          for (std::size_t b : buckets[std::size_t(cx) * B + std::size_t(cy)]) {
            if (b <= a) continue;
            std::size_t ib = b / ntau + i0, jb = b % ntau;
            if ((ib > i ? ib - i : i - ib) <= 1 && (jb > j ? jb - j : j - jb) <= 1) continue;
            Vec2 d = wrapped[b] + Vec2(double(qx) * kTwoPi, double(qy) * kTwoPi) - pa;
            Vec2 c = G * d;
            if (std::abs(c.x() / dt) < 0.5 && std::abs(c.y() / dtau) < 0.5) {
              out.push_back({chart.t[i], chart.tau[j], chart.t[ib], chart.tau[jb]});
              if (out.size() >= max_reported) break;
            }
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const std::vector<CocycleState>& path) {
  auto old = os.precision(17);
  os << "t,x1,x2,m11,m12,m21,m22,det\n";
  for (const auto& s : path)
    os << s.time << ',' << s.position.x() << ',' << s.position.y() << ',' << s.M(0, 0) << ','
       << s.M(0, 1) << ',' << s.M(1, 0) << ',' << s.M(1, 1) << ',' << s.M.determinant() << '\n';
  os.precision(old);
}

void write_chart_csv(std::ostream& os, const StripChart& chart) {
  auto old = os.precision(17);
  os << "t,tau,h1,h2,detDH\n";
  for (std::size_t i = 0; i < chart.t.size(); ++i)
    for (std::size_t j = 0; j < chart.tau.size(); ++j) {
      const auto& s = chart.at(i, j);
      os << chart.t[i] << ',' << chart.tau[j] << ',' << s.h.x() << ',' << s.h.y() << ',' << s.det << '\n';
    }
  os.precision(old);
}

}  // namespace eulerspec::flow
