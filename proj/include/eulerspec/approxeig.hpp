#pragma once

// Approximate eigenfunctions localized along a streamline: F(t, tau) =
// e^{alpha t} gamma(t) beta(tau) transplanted by a strip chart, f = F o H^-1,
// and the residual ||(L - z) g||_{H_m} with z = -alpha.

#include <iosfwd>
#include <string>
#include <vector>

#include "eulerspec/operators.hpp"

namespace eulerspec::approxeig {

using fields::FourierScalarField;
using fields::TrigVelocityField;

enum class BetaVariant { Tent, Indicator, Appendix };
const char* to_string(BetaVariant v);
BetaVariant beta_variant_from_string(const std::string& name);

/// C-infinity transition: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

/// Measured constants of the appendix cut-off beta = phi(tau/s) tau^m / m!.
struct AppendixConditions {
  double phi_cm = 0.0;  // max over l <= m of sup |phi^(l)|
  double c = 0.0;       // C sum_{l=1}^m binom(m,l) c^l / l! < 1/2
  std::vector<double> lower_ratio;  // sup |beta^(k)| / s^{m-k}, k < m   (a)
  double inf_top = 0.0;  // inf |beta^(m)| on [-s c, s c]                (b)
  double sup_top = 0.0;  // sup |beta^(m)| on [-s, s]                    (c)
};

/// gamma: the tent (1 - |t|/N) on [-N, N] with its three kinks smoothed by a
/// C-infinity kernel of the given width (0 keeps the exact tent). beta: one
/// of the transverse cut-offs on [-s, s].
class BumpProfile {
 public:
  /// smoothing < 0 selects 0.1 min(1, N/10).
  BumpProfile(double N, double s, int m, BetaVariant variant, double smoothing = -1.0);

  double N() const { return N_; }
  double s() const { return s_; }
  int m() const { return m_; }
  BetaVariant variant() const { return variant_; }
  double smoothing() const { return w_; }

  double gamma(double t) const;
  double dgamma(double t) const;
  double d2gamma(double t) const;
  /// k-th derivative of beta (k <= m + 1 for the appendix variant; the tent
  /// and indicator have k <= 1, classical derivative away from the kinks).
  double beta(double tau, int k = 0) const;

  const AppendixConditions& conditions() const { return cond_; }

 private:
  friend BumpProfile make_profiles(double, double, int, BetaVariant, double);
  double ramp(double x) const;  // smoothed max(x, 0)
  double step(double x) const;  // its derivative
  double kernel(double x) const;

  double N_, s_;
  int m_;
  BetaVariant variant_;
  double w_;
  double Nk_;  // tent half-length before smoothing
  AppendixConditions cond_;
};

/// Validates the appendix conditions for the appendix variant; a violated
/// condition (b) is a construction error.
BumpProfile make_profiles(double N, double s, int m, BetaVariant variant, double smoothing = -1.0);

/// x0 = y + delta v with v the stable eigenvector of Du(y) (lambda > 0) or
/// the unstable one (lambda < 0). When the eigen-line is not invariant, the
/// point is moved onto the invariant manifold by integrating from y + 1e-8 v.
Vec2 choose_base_point(const TrigVelocityField& u, const fields::StagnationPoint& y, double lambda,
                       double delta);

struct StripSamples {
  std::vector<Complex> F;   // e^{alpha t} gamma(t) beta(tau), chart sample order
  std::vector<Complex> Ft;  // e^{alpha t} gamma'(t) beta(tau)
};
StripSamples build_F(Complex alpha, const BumpProfile& profile, const flow::StripChart& chart);

struct Synthesis {
  FourierScalarField field;
  Complex mean{};  // (2 pi)^-2 int F, the dropped (0,0) coefficient
  double tail = 0.0;  // H_m tail fraction beyond 2M/3
  bool certificate_valid = false;
};
inline constexpr double kTailLimit = 1e-3;

/// g_k = (2 pi)^-2 sum over the chart lattice of F e^{-ik.H} dt dtau
/// (trapezoid weights, Jacobian 1).
Synthesis synthesize(const flow::StripChart& chart, const std::vector<Complex>& F, int M, int m,
                     kernels::Exec exec = kernels::Exec::Parallel);

enum class Symmetrization { MeanProjection, Partner };
const char* to_string(Symmetrization s);

struct ApproxEigenfunction {
  FourierScalarField field;  // mean zero, unit H_m norm
  int m = 0;
  double scale = 1.0;        // field = (f - partner_weight fbar) / scale
  Complex partner_weight{};  // 0 for mean projection
  double partner_offset = 0.0;
  Complex mean{};            // mean of f before symmetrization
  double tail = 0.0;
  bool certificate_valid = false;
};

/// Mean projection: drop the mean of f (its (0,0) coefficient) and
/// normalize.
ApproxEigenfunction symmetrize(const Synthesis& f, int m);
/// Partner: subtract fbar, built the same way on a disjoint window of the
/// same streamline, scaled to the same mean. Overlapping supports are a
/// symmetrization error.
ApproxEigenfunction symmetrize(const Synthesis& f, const flow::StripChart& chart_f,
                               const Synthesis& fbar, const flow::StripChart& chart_fbar,
                               double offset, int m);

struct ResidualBreakdown {
  double residual = 0.0;     // ||(L_M - z) g||_{H_m} / ||g||_{H_m}
  double advective = 0.0;    // ||(-A - z) g||_{H_m}
  double kg = 0.0;           // ||K g||_{H_m}
};
ResidualBreakdown residual(const TrigVelocityField& u, Complex z, const FourierScalarField& g, int m);
/// Certified variant: an invalid certificate is an error.
ResidualBreakdown residual(const TrigVelocityField& u, Complex z, const ApproxEigenfunction& g);

/// sqrt of int |u_perp o phi_t(x0)|^{2m} e^{2 m lambda t} |gamma'|^2 dt over
/// the same integral with |gamma|^2 (trajectory quadrature on [-N, N]).
double predicted_bound(const TrigVelocityField& u, const Vec2& x0, double lambda, int m,
                       const BumpProfile& profile, int samples_per_unit = 400);

// ---------------------------------------------------------------------------

enum class TheoremCase { Hyperbolic, LongOrbit };

struct SweepSpec {
  std::string scenario;
  std::string flow;  // preset name
  TheoremCase theorem = TheoremCase::Hyperbolic;
  int m = 1;
  double lambda = 1.0;  // Hyperbolic: sign selects the stable or unstable side
  std::vector<double> xi{0.0};
  std::vector<double> N{4, 6, 8};
  /// Explicit s values; empty means s = s_scale * 6 / N.
  std::vector<double> s;
  double s_scale = 1e-2;
  BetaVariant beta = BetaVariant::Appendix;
  Symmetrization symmetrization = Symmetrization::MeanProjection;
  double partner_gap = 1.0;
  int M = 48;
  double delta = 0.05;
  int orbit_grid = 32;  // LongOrbit base-point search
  flow::ChartOptions chart;
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct ResidualRow {
  std::string scenario;
  int m = 0;
  double lambda = 0.0, xi = 0.0, N = 0.0, s = 0.0;
  Complex z{};
  double residual = std::numeric_limits<double>::quiet_NaN();
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double kg_norm = std::numeric_limits<double>::quiet_NaN();
  double advective = std::numeric_limits<double>::quiet_NaN();
  double a_action_error = std::numeric_limits<double>::quiet_NaN();
  double tail = std::numeric_limits<double>::quiet_NaN();
  bool injectivity_ok = false;
  bool period_ok = false;
  bool certificate_valid = false;
  double strip_area = 0.0;  // 4 N s
  Vec2 base = Vec2::Zero();
  std::string note;  // failure reason when the row could not be completed
};

struct TrendSummary {
  bool decreasing_in_N = true;           // for every (xi, s) group
  double max_xi_variation = 0.0;         // (max - min) / max over xi at fixed (N, s)
  double max_ratio_to_predicted = 0.0;   // residual / predicted over completed rows
  std::size_t flagged_rows = 0;
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  TrendSummary trend;
};

/// Builds one row per (N, s, xi); rows that fail chart construction or
/// certification are kept with flags and a note.
ResidualReport sweep(const SweepSpec& spec);
TrendSummary summarize(const std::vector<ResidualRow>& rows);

/// Named sweeps: "cellular-hyperbolic" (m = 1, lambda = 1, xi in {0, 0.7,
/// 2}, N in {4, 6, 8}), "shear-long-orbit" (m = 0, xi = 0.37, indicator
/// beta, s = 0.02, N in {5, 10, 20}) and "rigid-lattice" (z = -0.5 i on the
/// same parameters).
SweepSpec named_sweep(const std::string& name);
std::vector<std::string> sweep_names();

void write_report_csv(std::ostream& os, const ResidualReport& report);

}  // namespace eulerspec::approxeig
