#pragma once

#include <random>

#include "doctest.h"
#include "eulerspec/fields.hpp"

namespace testsupport {

using namespace eulerspec;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline Vec2 random_point() { return {uniform(0.0, kTwoPi), uniform(0.0, kTwoPi)}; }

/// Random mean-zero field on box M with O(1) coefficients.
inline fields::FourierScalarField random_field(int M, bool real = false) {
  fields::FourierScalarField f{fields::ModeBox(M)};
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t i = 0; i < f.box().size(); ++i) f.data()[i] = {n(rng()), n(rng())};
  if (real) {
    for (std::size_t i = 0; i < f.box().size(); ++i) {
      auto k = f.box().mode(i);
      if (k.k1 > 0 || (k.k1 == 0 && k.k2 > 0)) f.set(-k, std::conj(f.coeff(k)));
    }
  }
  return f;
}

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testsupport
