#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "eulerspec/flow.hpp"

namespace eulerspec::orbits {

using fields::TrigVelocityField;

struct PeriodEstimate {
  TorusPoint point;
  /// Prime period; +inf when no return before the horizon, 0 at a
  /// stagnation point.
  double period = std::numeric_limits<double>::infinity();
  bool stagnation = false;
  double return_distance = std::numeric_limits<double>::infinity();
  double horizon = 0.0;

  bool infinite() const { return std::isinf(period); }
};

/// First return to x through the section normal to u(x), refined by
/// bisection in time.
PeriodEstimate prime_period(const TrigVelocityField& u, const Vec2& x, double horizon,
                            double tol = 1e-8, const flow::StepControl& sc = {});

struct OrbitScan {
  bool found = false;
  PeriodEstimate witness;  // meaningful when found
  double longest_finite = 0.0;
  std::vector<PeriodEstimate> samples;  // grid seeds (row-major in x1)
  std::size_t refinement_steps = 0;
};

/// Search a seed grid for a point with p >= target_n. When no grid seed
/// qualifies directly, bisect between a periodic seed and a neighbouring
/// stagnation or non-returning seed, where periods grow without bound.
OrbitScan longest_orbit_scan(const TrigVelocityField& u, double target_n, int seed_grid,
                             double horizon, const flow::StepControl& sc = {});

struct LongOrbitVerdict {
  bool value = false;
  std::size_t stagnation_points = 0;
  std::string provenance;
};

/// Sufficient condition: a nonzero field with at least two distinct
/// stagnation points has arbitrarily long orbits.
LongOrbitVerdict long_orbit_predicate(const TrigVelocityField& u);

void write_periods_csv(std::ostream& os, const std::vector<PeriodEstimate>& rows);

}  // namespace eulerspec::orbits
