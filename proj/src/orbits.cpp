#include "eulerspec/orbits.hpp"

#include <algorithm>
#include <ostream>

#include "detail/rk4.hpp"

namespace eulerspec::orbits {

using V2 = Eigen::Matrix<double, 2, 1>;

PeriodEstimate prime_period(const TrigVelocityField& u, const Vec2& x, double horizon, double tol,
                            const flow::StepControl& sc) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidInput, "period horizon must be positive");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "return tolerance must be positive");
  sc.validate();
  PeriodEstimate est;
  est.point = TorusPoint(x);
  est.horizon = horizon;

  const double vmax = std::max(u.max_speed(), 1e-300);
  Vec2 ux = u.velocity(x);
  if (ux.norm() <= 1e-10 * std::max(1.0, vmax)) {
    est.stagnation = true;
    est.period = 0.0;
    est.return_distance = 0.0;
    return est;
  }
  const Vec2 n = ux.normalized();
  auto g = [&](const Vec2& y) { return torus_delta(x, y).dot(n); };
  auto f = [&](const V2& y) -> V2 { return u.velocity(y); };

  const double h = sc.step;
  const double jump_guard = 4.0 * h * vmax + 1e-12;
  V2 y = x;
  double t = 0.0, gprev = 0.0;
  while (t < horizon) {
    double step = std::min(h, horizon - t);
    V2 next = flow::detail::rk4_step(f, y, step);
    if (!next.allFinite()) flow::detail::integration_failure(y, t, "non-finite state");
    double gnew = g(next);
    if (gprev < 0.0 && gnew >= 0.0 && gnew - gprev < jump_guard) {
      // Bisection in time on the section crossing.
      double lo = 0.0, hi = step;
      for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(flow::detail::rk4_step(f, y, mid)) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      V2 hit = flow::detail::rk4_step(f, y, hi);
      double dist = torus_distance(hit, x);
      if (dist <= tol) {
        est.period = t + hi;
        est.return_distance = dist;
        return est;
      }
      est.return_distance = std::min(est.return_distance, dist);
    }
    y = next;
    gprev = gnew;
    t += step;
  }
  return est;
}

namespace {

bool qualifies(const PeriodEstimate& p, double target) { return !p.stagnation && p.period >= target; }

}  // namespace

OrbitScan longest_orbit_scan(const TrigVelocityField& u, double target_n, int seed_grid,
                             double horizon, const flow::StepControl& sc) {
  if (!(target_n > 0.0) || !(horizon >= target_n))
    throw Error(ErrorKind::InvalidInput, "need 0 < targetN <= horizon");
  if (seed_grid < 2) throw Error(ErrorKind::InvalidInput, "seed grid must be at least 2");
  OrbitScan scan;
  const int n = seed_grid;
  const double h = kTwoPi / n;
  scan.samples.resize(std::size_t(n) * n);
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      scan.samples[std::size_t(i) * n + j] = prime_period(u, Vec2(i * h, j * h), horizon, 1e-8, sc);

  const PeriodEstimate* finite_witness = nullptr;
  const PeriodEstimate* open_witness = nullptr;
  for (const auto& p : scan.samples) {
    if (!p.stagnation && !p.infinite()) scan.longest_finite = std::max(scan.longest_finite, p.period);
    if (!qualifies(p, target_n)) continue;
    if (!p.infinite() && !finite_witness) finite_witness = &p;
    if (p.infinite() && !open_witness) open_witness = &p;
  }
  if (finite_witness) {
    scan.found = true;
    scan.witness = *finite_witness;
    return scan;
  }

  // Bisect between a periodic seed and a neighbour that never returns.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& a = scan.samples[std::size_t(i) * n + j];
      if (a.stagnation || a.infinite()) continue;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        std::size_t b = std::size_t((i + di[d] + n) % n) * n + std::size_t((j + dj[d] + n) % n);
        const auto& pb = scan.samples[b];
        if (pb.stagnation || pb.infinite()) pairs.push_back({std::size_t(i) * n + j, b});
      }
    }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
    return scan.samples[p.first].period > scan.samples[q.first].period;
  });
  const std::size_t max_pairs = 4;
  for (std::size_t k = 0; k < std::min(max_pairs, pairs.size()); ++k) {
    Vec2 lo = scan.samples[pairs[k].first].point.vec();
    Vec2 hi = lo + torus_delta(lo, scan.samples[pairs[k].second].point.vec());
    for (int it = 0; it < 48; ++it) {
      ++scan.refinement_steps;
      Vec2 mid = 0.5 * (lo + hi);
      PeriodEstimate p = prime_period(u, mid, horizon, 1e-8, sc);
      if (p.stagnation || p.infinite()) {
        hi = mid;
        continue;
      }
      scan.longest_finite = std::max(scan.longest_finite, p.period);
      if (p.period >= target_n) {
        scan.found = true;
        scan.witness = p;
        return scan;
      }
      lo = mid;
    }
  }
  if (open_witness) {
    scan.found = true;
    scan.witness = *open_witness;
  }
  return scan;
}

LongOrbitVerdict long_orbit_predicate(const TrigVelocityField& u) {
  LongOrbitVerdict v;
  if (u.is_zero()) {
    v.provenance = "velocity field is identically zero; the criterion does not apply";
    return v;
  }
  auto analysis = fields::find_stagnation_points(u);
  v.stagnation_points = analysis.points.size();
  v.value = v.stagnation_points >= 2;
  v.provenance =
      "sufficient condition: a nonzero steady field with at least two distinct stagnation points "
      "has orbits of arbitrarily long prime period (found " +
      std::to_string(v.stagnation_points) + " distinct points)";
  return v;
}

void write_periods_csv(std::ostream& os, const std::vector<PeriodEstimate>& rows) {
  auto old = os.precision(17);
  os << "x1,x2,period_or_inf,horizon\n";
  for (const auto& r : rows) {
    os << r.point.x1 << ',' << r.point.x2 << ',';
    if (r.infinite())
      os << "inf";
    else
      os << r.period;
    os << ',' << r.horizon << '\n';
  }
  os.precision(old);
}

}  // namespace eulerspec::orbits
