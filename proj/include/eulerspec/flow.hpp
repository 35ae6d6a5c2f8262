#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "eulerspec/fields.hpp"

namespace eulerspec::flow {

using fields::TrigVelocityField;

/// Classical RK4. Fixed mode splits each requested interval into equal steps
/// no longer than `step`; adaptive mode uses step doubling with the given
/// tolerances.
struct StepControl {
  double step = 1e-3;
  bool adaptive = false;
  double rtol = 1e-10;
  double atol = 1e-12;
  double min_step = 1e-12;
  double max_step = 0.1;

  void validate() const;
};

/// Position (lifted to R^2), Jacobian M = Dphi_t and optionally the second
/// differential M2 = D^2 phi_t (M2[i](j,k) = d^2 phi_i / dx_j dx_k).
struct CocycleState {
  double time = 0.0;
  Vec2 position = Vec2::Zero();
  Mat2 M = Mat2::Identity();
  Tensor2 M2 = zero_tensor();
  bool has_second = false;

  TorusPoint point() const { return TorusPoint(position); }
};

/// Sampled trajectory of dx/dt = u(x) with cubic Hermite dense output.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<Vec2> positions, std::vector<Vec2> velocities);

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  const Vec2& endpoint() const { return positions_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec2>& positions() const { return positions_; }
  /// Interpolated position at any t between start and end (either order).
  Vec2 at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<Vec2> positions_;
  std::vector<Vec2> velocities_;
};

/// Integrate from x0 over time t (t < 0 integrates the reversed field).
Trajectory advance(const TrigVelocityField& u, const Vec2& x0, double t, const StepControl& sc = {});

/// Endpoint only, without storing the path.
Vec2 flow_map(const TrigVelocityField& u, const Vec2& x0, double t, const StepControl& sc = {});

/// Dphi_t(x0) together with phi_t(x0).
CocycleState tangent_flow(const TrigVelocityField& u, const Vec2& x0, double t,
                          const StepControl& sc = {});
/// Continue the variational system from an arbitrary state for time dt;
/// start.M need not be the identity.
CocycleState continue_tangent(const TrigVelocityField& u, const CocycleState& start, double dt,
                              const StepControl& sc = {});
/// States at t = 0, every, 2 every, ..., t (dump support).
std::vector<CocycleState> tangent_path(const TrigVelocityField& u, const Vec2& x0, double t,
                                       double every, const StepControl& sc = {});

/// First and second variation.
CocycleState second_variation(const TrigVelocityField& u, const Vec2& x0, double t,
                              const StepControl& sc = {});

/// Continue the first and second variation from an arbitrary state.
CocycleState continue_second(const TrigVelocityField& u, const CocycleState& start, double dt,
                             const StepControl& sc = {});

/// Transverse flow d/dtau psi = u_perp / |u|^2. Throws stagnation-proximity
/// when |u| drops below floor_fraction * max|u| along the arc.
Vec2 transverse_flow(const TrigVelocityField& u, const Vec2& x0, double tau,
                     const StepControl& sc = {}, double floor_fraction = 1e-6);

// ---------------------------------------------------------------------------
// Strip chart H(t, tau) = phi_t(psi_tau(x0)).

struct ChartOptions {
  int n_t = 0;     // 0: max(400, 100 N) over a length 2N
  int n_tau = 40;
  StepControl step;
  double floor_fraction = 1e-6;
  /// Throw chart-overlap instead of returning an uncertified chart.
  bool strict_injectivity = false;
  /// Check p(x0) > min_period with the orbits module; min_period = 0 means
  /// 1.5 times the chart length (3N for a symmetric chart).
  bool check_period = true;
  double min_period = 0.0;
  /// Throw precondition instead of recording period_ok = false.
  bool enforce_period = false;
  std::size_t max_reported_overlaps = 16;
};

struct ChartSample {
  Vec2 h = Vec2::Zero();          // lifted H(t, tau)
  Mat2 dh_inv_t = Mat2::Zero();   // DH^{-T}
  Vec2 u_perp = Vec2::Zero();     // u_perp evaluated at H
  double det = 1.0;               // det DH
};

struct ChartOverlap {
  double t_a, tau_a, t_b, tau_b;
};

struct StripChart {
  TorusPoint base;
  double s = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::vector<double> t;    // t lattice (uniform, endpoints included)
  std::vector<double> tau;  // tau lattice (uniform, endpoints included)
  std::vector<ChartSample> samples;  // row-major in t: index it * tau.size() + jt
  bool injectivity_ok = true;
  std::vector<ChartOverlap> overlaps;
  bool period_ok = true;
  double period = 0.0;  // prime period of x0 (inf if none within horizon)
  double max_det_error = 0.0;
  double max_perp_error = 0.0;  // relative |DH^{-T} e2 - u_perp(H)| / |u_perp(H)|

  const ChartSample& at(std::size_t it, std::size_t jt) const { return samples[it * tau.size() + jt]; }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  double dtau() const { return tau.size() > 1 ? tau[1] - tau[0] : 0.0; }
  double half_length() const { return 0.5 * (t_hi - t_lo); }
};

/// Chart on [-N, N] x [-s, s].
StripChart build_chart(const TrigVelocityField& u, const Vec2& x0, double N, double s,
                       const ChartOptions& opt = {});
/// Chart on [t_lo, t_hi] x [-s, s]; n_t = 0 scales the default density.
StripChart build_chart_range(const TrigVelocityField& u, const Vec2& x0, double t_lo, double t_hi,
                             double s, const ChartOptions& opt = {});

/// Recheck the half-cell coincidence certificate on a sub-rectangle of t
/// indices [i0, i1).
std::vector<ChartOverlap> find_overlaps(const StripChart& chart, std::size_t i0, std::size_t i1,
                                        std::size_t max_reported);

// CSV dumps.
void write_trajectory_csv(std::ostream& os, const std::vector<CocycleState>& path);
void write_chart_csv(std::ostream& os, const StripChart& chart);

}  // namespace eulerspec::flow
