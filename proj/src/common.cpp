#include "eulerspec/common.hpp"

#include <algorithm>

namespace eulerspec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::StagnationProximity: return "stagnation-proximity";
    case ErrorKind::ChartOverlap: return "chart-overlap";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Symmetrization: return "symmetrization";
    case ErrorKind::Construction: return "construction";
    case ErrorKind::EigenSolver: return "eigensolver";
    case ErrorKind::Aliasing: return "aliasing";
    case ErrorKind::InvalidCertificate: return "invalid-certificate";
    case ErrorKind::MissingArtifact: return "missing-artifact";
    case ErrorKind::Checksum: return "checksum-mismatch";
  }
  return "unknown";
}

double spectral_norm(const Mat2& m) {
  // Largest singular value from the closed form for 2x2 matrices.
  double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  double s1 = a * a + b * b + c * c + d * d;
  double det = a * d - b * c;
  double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
  return std::sqrt(0.5 * (s1 + disc));
}

double bilinear_norm(const Tensor2& b) {
  // For symmetric B the sup over v = w equals the sup over pairs, and
  // B(v,v) with v = (cos t, sin t) is p + Q (cos 2t, sin 2t).
  Vec2 p, q0, q1;
  for (int i = 0; i < 2; ++i) {
    double a = b[i](0, 0), c = b[i](1, 1), o = 0.5 * (b[i](0, 1) + b[i](1, 0));
    p(i) = 0.5 * (a + c);
    q0(i) = 0.5 * (a - c);
    q1(i) = o;
  }
  auto f = [&](double phi) { return (p + q0 * std::cos(phi) + q1 * std::sin(phi)).norm(); };
  const int n = 256;
  double best = 0.0, arg = 0.0;
  for (int i = 0; i < n; ++i) {
    double phi = kTwoPi * i / n;
    double v = f(phi);
    if (v > best) best = v, arg = phi;
  }
  // Golden-section refinement around the best sample.
  double lo = arg - kTwoPi / n, hi = arg + kTwoPi / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo), f1 = f(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo), f2 = f(x2);
    }
  }
  return std::max({best, f1, f2});
}

}  // namespace eulerspec
