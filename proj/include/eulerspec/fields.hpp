#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eulerspec/common.hpp"

namespace eulerspec::fields {

struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  double norm() const { return std::hypot(double(k1), double(k2)); }
  int norm2() const { return k1 * k1 + k2 * k2; }
  bool is_zero() const { return k1 == 0 && k2 == 0; }
  ModeIndex operator-() const { return {-k1, -k2}; }
  ModeIndex operator+(const ModeIndex& o) const { return {k1 + o.k1, k2 + o.k2}; }
  ModeIndex operator-(const ModeIndex& o) const { return {k1 - o.k1, k2 - o.k2}; }
  auto operator<=>(const ModeIndex&) const = default;
};

/// The set {k : |k1|, |k2| <= M, k != 0} with a fixed enumeration order
/// (k1 major, then k2). The zero mode has no slot.
class ModeBox {
 public:
  explicit ModeBox(int max_index = 0);

  int max_index() const { return m_; }
  std::size_t size() const { return size_; }
  bool contains(const ModeIndex& k) const {
    return !k.is_zero() && std::abs(k.k1) <= m_ && std::abs(k.k2) <= m_;
  }
  /// Slot of k; k must be contained.
  std::size_t index(const ModeIndex& k) const {
    std::size_t lin = std::size_t(k.k1 + m_) * std::size_t(2 * m_ + 1) + std::size_t(k.k2 + m_);
    return lin > center_ ? lin - 1 : lin;
  }
  ModeIndex mode(std::size_t i) const {
    std::size_t lin = i >= center_ ? i + 1 : i;
    int w = 2 * m_ + 1;
    return {int(lin / std::size_t(w)) - m_, int(lin % std::size_t(w)) - m_};
  }
  bool operator==(const ModeBox& o) const { return m_ == o.m_; }

 private:
  int m_;
  std::size_t size_;
  std::size_t center_;
};

/// Mean-zero scalar field on the 2-torus, w(x) = sum_k w_k e^{ik.x}, stored
/// densely on a mode box. L2 norm^2 = sum |w_k|^2.
class FourierScalarField {
 public:
  FourierScalarField() : FourierScalarField(ModeBox(0)) {}
  explicit FourierScalarField(ModeBox box);
  FourierScalarField(ModeBox box, std::vector<Complex> coefficients);

  /// Build from sparse (k, c) pairs. A (0,0) entry or a mode outside the box
  /// is an invalid-input error.
  static FourierScalarField from_coefficients(
      int max_index, std::span<const std::pair<ModeIndex, Complex>> coefficients);

  const ModeBox& box() const { return box_; }
  int max_index() const { return box_.max_index(); }

  Complex coeff(const ModeIndex& k) const {
    return box_.contains(k) ? data_[box_.index(k)] : Complex{};
  }
  void set(const ModeIndex& k, Complex value);
  void add(const ModeIndex& k, Complex value);

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  double l2_norm() const;
  /// (sum |k|^{2m} |w_k|^2)^{1/2}.
  double sobolev_norm(int m) const;
  /// Fraction of the H_m norm^2 carried by modes with max(|k1|,|k2|) > cutoff.
  double tail_fraction(int m, double cutoff) const;
  /// True when w_{-k} = conj(w_k) for every k within tol (relative to norm).
  bool is_real(double tol = 1e-12) const;

  Complex evaluate(const Vec2& x) const;

  /// Same coefficients on a different box (zero-padded or truncated).
  FourierScalarField resized(int max_index) const;

  FourierScalarField& operator+=(const FourierScalarField& o);
  FourierScalarField& operator-=(const FourierScalarField& o);
  FourierScalarField& operator*=(Complex c);

 private:
  ModeBox box_;
  std::vector<Complex> data_;
};

FourierScalarField operator-(FourierScalarField a, const FourierScalarField& b);
FourierScalarField operator+(FourierScalarField a, const FourierScalarField& b);
FourierScalarField operator*(Complex c, FourierScalarField a);

/// Mean-zero vector field with two components on a common box.
struct FourierVectorField {
  FourierScalarField c1;
  FourierScalarField c2;

  const ModeBox& box() const { return c1.box(); }
  /// Divergence symbol i k.v_k, per mode.
  std::vector<Complex> divergence() const;
};

/// Scalar curl w = -d2 v1 + d1 v2.
FourierScalarField curl(const FourierVectorField& v);

/// Divergence-free solution of curl v = w. The coefficient map is
/// v_k = i (k2, -k1) / |k|^2 w_k, so that curl(curl_inverse(w)) = w.
FourierVectorField curl_inverse(const FourierScalarField& w);

/// Derivatives of a velocity field at one point.
struct VelocityJet {
  Vec2 value = Vec2::Zero();
  Mat2 jacobian = Mat2::Zero();   // (i, j) = d u_i / d x_j
  Tensor2 hessian = zero_tensor();  // hessian[i](j, l) = d^2 u_i / dx_j dx_l
};

/// Divergence-free velocity u = U0 + (-d2 psi, d1 psi) with psi a real
/// trigonometric polynomial and U0 a constant drift.
class TrigVelocityField {
 public:
  TrigVelocityField() = default;
  TrigVelocityField(Vec2 mean_velocity, std::vector<std::pair<ModeIndex, Complex>> stream);

  const Vec2& mean_velocity() const { return mean_; }
  /// Stream coefficients, including both k and -k.
  const std::vector<std::pair<ModeIndex, Complex>>& stream() const { return stream_; }
  /// Largest |k_i| in the stream support.
  int support_radius() const { return radius_; }
  bool is_zero() const { return halves_.empty() && mean_.isZero(0.0); }

  Vec2 velocity(const Vec2& x) const;
  /// Value and Jacobian.
  void jet1(const Vec2& x, Vec2& value, Mat2& jacobian) const;
  VelocityJet eval(const Vec2& x, int order) const;

  /// Fourier coefficient of the velocity at k (k = 0 gives the drift).
  std::array<Complex, 2> velocity_coeff(const ModeIndex& k) const;
  /// Vorticity curl u = Laplacian psi on the stream support box.
  FourierScalarField vorticity() const;
  /// Fourier coefficient of curl u at k.
  Complex vorticity_coeff(const ModeIndex& k) const;

  /// max |u| sampled on a 128^2 grid (cached).
  double max_speed() const;

 private:
  struct HalfMode {
    double k1, k2;
    double a, b;  // psi contribution a cos(k.x) + b sin(k.x)
  };
  Vec2 mean_ = Vec2::Zero();
  std::vector<std::pair<ModeIndex, Complex>> stream_;
  std::vector<HalfMode> halves_;
  int radius_ = 0;
  mutable double max_speed_ = -1.0;
};

/// u = grad-perp psi for a real mean-zero psi; non-conjugate-symmetric input
/// is an invalid-input error.
TrigVelocityField velocity_from_stream(const FourierScalarField& psi);

/// Named steady states: "rigid" u=(1,0), "shear" u=(sin x2, 0),
/// "cellular" psi = sin x1 sin x2.
TrigVelocityField preset(const std::string& name);
std::vector<std::string> preset_names();

// ---------------------------------------------------------------------------
// Stagnation points

enum class StagnationKind { Hyperbolic, Center, Degenerate };
const char* to_string(StagnationKind kind);

struct StagnationPoint {
  TorusPoint location;
  Mat2 jacobian = Mat2::Zero();
  StagnationKind kind = StagnationKind::Degenerate;
  double exponent = 0.0;  // lambda > 0 for hyperbolic points
  double residual = 0.0;  // |u(location)|
};

/// A non-isolated piece of the zero set, represented by one point.
struct DegenerateLine {
  TorusPoint representative;
  Vec2 direction = Vec2::Zero();
  std::size_t cells = 0;
};

/// A sign-change cell where Newton failed from every seed.
struct UnresolvedCell {
  TorusPoint center;
  double min_speed = 0.0;
};

struct StagnationAnalysis {
  /// Isolated points plus one degenerate representative per line, sorted
  /// lexicographically by location.
  std::vector<StagnationPoint> points;
  std::vector<DegenerateLine> degenerate_lines;
  std::vector<UnresolvedCell> unresolved;

  std::size_t count(StagnationKind kind) const;
};

StagnationAnalysis find_stagnation_points(const TrigVelocityField& u, int seed_grid = 64,
                                          double tol = 1e-12);

// ---------------------------------------------------------------------------
// Exchange format: header "mode-coefficients v1" then "k1,k2,re,im" lines.

void write_mode_coefficients(std::ostream& os,
                             std::span<const std::pair<ModeIndex, Complex>> coefficients);
std::vector<std::pair<ModeIndex, Complex>> read_mode_coefficients(std::istream& is);

/// Nonzero coefficients of a field, in box order.
std::vector<std::pair<ModeIndex, Complex>> nonzero_coefficients(const FourierScalarField& f,
                                                                 double threshold = 0.0);

}  // namespace eulerspec::fields
