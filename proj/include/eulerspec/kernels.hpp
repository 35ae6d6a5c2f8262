#pragma once

// Data-parallel kernels. Every kernel has a serial path (Exec::Serial) that
// runs the same arithmetic on one thread; it is the reference in tests and
// the baseline in the benchmark.

#include <vector>

#include "eulerspec/flow.hpp"

namespace eulerspec::kernels {

enum class Exec { Serial, Parallel };

/// log of the spectral norm of Dphi_t at each point for every t in times
/// (ascending, > 0), integrated with re-orthonormalization at least every
/// `reorth` time units. Result is row-major [point][time].
std::vector<double> log_norm_at(const fields::TrigVelocityField& u, const std::vector<Vec2>& points,
                                const std::vector<double>& times, double reorth,
                                const flow::StepControl& sc, Exec exec);

/// log of the bilinear norm of D^2 phi_t at each point for every t in times
/// (ascending, > 0). Result is row-major [point][time].
std::vector<double> log_second_norm_at(const fields::TrigVelocityField& u,
                                       const std::vector<Vec2>& points,
                                       const std::vector<double>& times,
                                       const flow::StepControl& sc, Exec exec);

/// phi_t of many points.
std::vector<Vec2> advect(const fields::TrigVelocityField& u, const std::vector<Vec2>& points,
                         double t, const flow::StepControl& sc, Exec exec);

/// Values of a Fourier field at scattered points.
std::vector<Complex> evaluate(const fields::FourierScalarField& f, const std::vector<Vec2>& points,
                              Exec exec);

/// c_k = sum_s weights_s exp(-i k . points_s) for all k in the box
/// |k1|, |k2| <= M, k != 0, returned in ModeBox order. Separable
/// factorization: the sum over s is a (2M+1) x S by S x (2M+1) product.
std::vector<Complex> nudft(const std::vector<Vec2>& points, const std::vector<Complex>& weights,
                           int M, Exec exec);

/// Direct O(K S) summation of the same transform (test oracle).
std::vector<Complex> nudft_direct(const std::vector<Vec2>& points,
                                  const std::vector<Complex>& weights, int M);

}  // namespace eulerspec::kernels
