#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace eulerspec {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Second-derivative tensor of a map R^2 -> R^2: component i holds the
/// symmetric Hessian of the i-th output.
using Tensor2 = std::array<Mat2, 2>;

inline Tensor2 zero_tensor() { return {Mat2::Zero(), Mat2::Zero()}; }

// ---------------------------------------------------------------------------
// Errors

enum class ErrorKind {
  InvalidInput,
  IntegrationFailure,
  StagnationProximity,
  ChartOverlap,
  Precondition,
  Symmetrization,
  Construction,
  EigenSolver,
  Aliasing,
  InvalidCertificate,
  MissingArtifact,
  Checksum,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Torus geometry. Points are integrated in lifted coordinates on R^2 and only
// reduced when reported.

/// Reduce a coordinate into [0, 2pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Reduce a displacement into (-pi, pi].
inline double wrap_delta(double d) {
  double r = wrap_angle(d + std::numbers::pi) - std::numbers::pi;
  return r;
}

struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  TorusPoint() = default;
  TorusPoint(double a, double b) : x1(wrap_angle(a)), x2(wrap_angle(b)) {}
  explicit TorusPoint(const Vec2& v) : TorusPoint(v.x(), v.y()) {}

  Vec2 vec() const { return {x1, x2}; }
  bool operator==(const TorusPoint&) const = default;
};

/// Minimal displacement b - a on the torus, componentwise in (-pi, pi].
inline Vec2 torus_delta(const Vec2& a, const Vec2& b) {
  return {wrap_delta(b.x() - a.x()), wrap_delta(b.y() - a.y())};
}

/// Flat-torus distance.
inline double torus_distance(const Vec2& a, const Vec2& b) {
  return torus_delta(a, b).norm();
}
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return torus_distance(a.vec(), b.vec());
}

/// Rotation by +90 degrees: v -> (-v2, v1).
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

/// Inverse transpose of a 2x2 matrix through the adjugate, assuming det = 1.
inline Mat2 unimodular_inverse_transpose(const Mat2& m) {
  Mat2 r;
  r << m(1, 1), -m(1, 0), -m(0, 1), m(0, 0);
  return r;
}

/// Operator 2-norm (largest singular value) of a 2x2 matrix.
double spectral_norm(const Mat2& m);

/// Norm of a symmetric bilinear map R^2 x R^2 -> R^2,
/// sup{|B(v,w)| : |v| = |w| = 1}.
double bilinear_norm(const Tensor2& b);

}  // namespace eulerspec
