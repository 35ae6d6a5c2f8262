#pragma once

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "eulerspec/flow.hpp"

namespace eulerspec::flow::detail {

template <class V, class F>
V rk4_step(const F& f, const V& y, double h) {
  V k1 = f(y);
  V k2 = f(V(y + 0.5 * h * k1));
  V k3 = f(V(y + 0.5 * h * k2));
  V k4 = f(V(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class V>
[[noreturn]] void integration_failure(const V& y, double elapsed, const char* why) {
  std::ostringstream os;
  os.precision(17);
  os << "integration failure (" << why << ") after time " << elapsed << "; last good state:";
  for (Eigen::Index i = 0; i < y.size(); ++i) os << ' ' << y(i);
  throw Error(ErrorKind::IntegrationFailure, os.str());
}

/// Integrate dy/ds = f(y) for s in [0, duration], duration >= 0.
template <class V, class F>
V integrate(const F& f, V y, double duration, const StepControl& sc) {
  if (duration <= 0.0) return y;
  if (!sc.adaptive) {
    long n = std::max(1L, long(std::ceil(duration / sc.step - 1e-9)));
    double h = duration / double(n);
    for (long i = 0; i < n; ++i) {
      V next = rk4_step(f, y, h);
      if (!next.allFinite()) integration_failure(y, double(i) * h, "non-finite state");
      y = next;
    }
    return y;
  }
  double s = 0.0;
  double h = std::min(sc.step, sc.max_step);
  while (s < duration) {
    h = std::min(h, duration - s);
    V full = rk4_step(f, y, h);
    V half = rk4_step(f, y, 0.5 * h);
    half = rk4_step(f, half, 0.5 * h);
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double scale = sc.atol + sc.rtol * std::max(std::abs(y(i)), std::abs(half(i)));
      err = std::max(err, std::abs(half(i) - full(i)) / 15.0 / scale);
    }
    if (!half.allFinite()) err = 1e300;
    if (err <= 1.0) {
      s += h;
      y = half + (half - full) / 15.0;
    }
    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 4.0;
    double hn = h * std::clamp(fac, 0.2, 4.0);
    hn = std::min(hn, sc.max_step);
    if (err > 1.0 && hn < sc.min_step) integration_failure(y, s, "step size underflow");
    h = hn;
  }
  return y;
}

}  // namespace eulerspec::flow::detail
