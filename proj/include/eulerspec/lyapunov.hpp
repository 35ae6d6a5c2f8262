#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eulerspec/flow.hpp"
#include "eulerspec/kernels.hpp"

namespace eulerspec::lyapunov {

using fields::TrigVelocityField;

struct LyapunovOptions {
  flow::StepControl step;
  double reorth_interval = 0.5;
  double fit_fraction = 0.5;  // fit over the last fit_fraction of [0, T]
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct ExponentEstimate {
  double value = 0.0;
  double horizon = 0.0;
  /// (t, log ||Dphi_t|| / t) at every re-orthonormalization time.
  std::vector<std::pair<double, double>> trace;
};

/// Largest exponent at x0: least-squares slope of log ||Dphi_t(x0)|| over
/// the fit window. The second exponent is -value by area preservation.
ExponentEstimate exponent_at(const TrigVelocityField& u, const Vec2& x0, double T,
                             const LyapunovOptions& opt = {});

/// Slope of y against x by least squares.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct GlobalExponent {
  double value = 0.0;
  double grid_value = 0.0;        // max over the grid of the fitted exponent
  TorusPoint grid_argmax;
  double stagnation_value = 0.0;  // max exact exponent at hyperbolic points
  bool has_stagnation = false;
  std::string provenance;         // "grid" or "stagnation"
  std::vector<double> field;      // per grid node, row-major in x1
  int grid = 0;
  double horizon = 0.0;
};

/// Grid exponents use the exponent_at fit (slope of log ||Dphi_t|| over the
/// last fit_fraction of [0, T]); the larger of the grid maximum and the exact
/// stagnation exponents is returned.
GlobalExponent global_exponent(const TrigVelocityField& u, double T, int grid_size,
                               const LyapunovOptions& opt = {});

/// Exponents +-lambda at hyperbolic points and 0 at centres and degenerate
/// points, sorted and deduplicated within 1e-10.
std::vector<double> stagnation_exponents(const TrigVelocityField& u);

// ---------------------------------------------------------------------------
// Bicharacteristic amplitude system
//   x' = u(x), xi' = -Du^T xi, b' = -Du b + 2 <Du b, xi> xi / |xi|^2.

struct BasSample {
  double t;
  Vec2 x;
  Vec2 xi;  // un-renormalized
  Vec2 b;   // un-renormalized
  double integral;  // |b| |xi|
};

struct BasTrajectory {
  std::vector<BasSample> samples;
  double first_integral_drift = 0.0;
  double log_b = 0.0;   // log |b(T)|
  double log_xi = 0.0;  // log |xi(T)|
  std::size_t renormalizations = 0;
};

struct BasOptions {
  flow::StepControl step;
  double sample_interval = 0.1;
  /// Rescale xi or b when their norm leaves [1/limit, limit].
  double renorm_limit = 1e8;
};

BasTrajectory bas_trajectory(const TrigVelocityField& u, const Vec2& x0, const Vec2& xi0,
                             const Vec2& b0, double T, const BasOptions& opt = {});

/// Initial data for the amplitude system. Hyperbolic stagnation points come
/// first, each with xi0 along the contracting direction of -Du^T (where b
/// grows at the rate lambda); the rest are uniform random points and angles
/// from a fixed seed.
struct BasSampleSpec {
  std::size_t count = 50;
  std::uint64_t seed = 1;
  bool include_stagnation = true;
};

struct BasInitial {
  Vec2 x, xi, b;
};
std::vector<BasInitial> make_bas_samples(const TrigVelocityField& u, const BasSampleSpec& spec);

struct BasExponent {
  double value = 0.0;
  std::size_t argmax = 0;
  std::vector<double> per_sample;
};

/// mu: max over samples of log |b(T)| / T.
BasExponent bas_max_exponent(const TrigVelocityField& u, const BasSampleSpec& spec, double T,
                             const BasOptions& opt = {});

/// mu_m: max over samples of log[(1 + |xi|^2)^{m/2} |b|] / T, measured
/// relative to its value at t = 0.
BasExponent weighted_b_exponent(const TrigVelocityField& u, int m, const BasSampleSpec& spec,
                                double T, const BasOptions& opt = {});

// ---------------------------------------------------------------------------

struct HigherNormGrowth {
  int m = 1;
  double value = 0.0;
  bool vanishing = false;  // D^m phi identically zero on the grid
  std::vector<std::pair<double, double>> trace;  // (t, max_x log ||D^m phi_t|| / t)
};

/// Growth rate of max_x ||D^m phi_t(x)|| for m in {1, 2}.
HigherNormGrowth higher_norm_growth(const TrigVelocityField& u, int m, double T, int grid_size,
                                    const LyapunovOptions& opt = {});

void write_exponent_field_csv(std::ostream& os, const GlobalExponent& g);
void write_bas_csv(std::ostream& os, const BasTrajectory& tr);

}  // namespace eulerspec::lyapunov
