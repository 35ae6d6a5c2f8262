#pragma once

// Fourier-Galerkin truncations of the linearized Euler operator in vorticity
// form, L = -A + K with A w = <u, grad> w and K w = -<curl^-1 w, grad> curl u,
// and of its velocity form. Matrices act on coefficient vectors in ModeBox
// order.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerspec/flow.hpp"
#include "eulerspec/kernels.hpp"

namespace eulerspec::operators {

using fields::FourierScalarField;
using fields::ModeBox;
using fields::ModeIndex;
using fields::TrigVelocityField;

enum class OperatorKind { A, K, L, Lvel };
const char* to_string(OperatorKind kind);

/// Largest box for which dense matrices and eigensolves are supported.
inline constexpr int kDenseCeiling = 16;

struct GalerkinOperator {
  ModeBox box;
  OperatorKind kind = OperatorKind::L;
  int m = 0;  // Sobolev index used when weighting
  /// n x n on the box; for Lvel 2n x 2n with blocks [v1; v2].
  Eigen::MatrixXcd matrix;
};

/// Entry (k, k') = i <u_{k-k'}, k'>; modes leaving the box are dropped.
GalerkinOperator assemble_A(const TrigVelocityField& u, int M);
/// Entry (k, k') = <(k2', -k1'), k - k'> (curl u)_{k-k'} / |k'|^2.
GalerkinOperator assemble_K(const TrigVelocityField& u, int M);
GalerkinOperator assemble_L(const TrigVelocityField& u, int M);
/// -A + K entrywise; differing boxes are an invalid-input error.
GalerkinOperator combine_L(const GalerkinOperator& A, const GalerkinOperator& K);
/// L_vel v = -P(<u, grad> v + <v, grad> u), P the Leray projection.
GalerkinOperator assemble_Lvel(const TrigVelocityField& u, int M);

struct SimilarityCheck {
  double discrepancy = 0.0;  // max entry of curl L_vel curl^-1 - L on interior rows
  std::size_t interior_modes = 0;
};
/// Compares curl o L_vel with L o curl on divergence-free fields. Interior
/// rows are modes whose convolution with the support of u stays in the box.
SimilarityCheck check_similarity(const TrigVelocityField& u, int M);

double sobolev_norm(const FourierScalarField& w, int m);

Eigen::VectorXcd to_vector(const FourierScalarField& w);
FourierScalarField from_vector(const ModeBox& box, const Eigen::VectorXcd& v);

/// Eigenvalues of W matrix W^-1 with W = diag(|k|^m), ordered by real part
/// then imaginary part; parts within 1e-9 are treated as equal so the order
/// is stable under rounding.
std::vector<Complex> spectrum(const GalerkinOperator& op, int m);
void sort_eigenvalues(std::vector<Complex>& values, double tol = 1e-9);

/// Largest distance between eigenvalues of exp(t L) and exp(t sigma(L)),
/// matched greedily.
double spectral_inclusion_error(const GalerkinOperator& op, double t);

// Matrix-free application on a padded grid (exact for trigonometric u).
// The result is truncated to the box of w, matching the Galerkin matrices.
FourierScalarField apply_A(const TrigVelocityField& u, const FourierScalarField& w);
FourierScalarField apply_K(const TrigVelocityField& u, const FourierScalarField& w);
FourierScalarField apply_L(const TrigVelocityField& u, const FourierScalarField& w);

// ---------------------------------------------------------------------------
// Evolution semigroup e^{tA} w = w o phi_t

struct PushforwardOptions {
  int grid = 256;
  flow::StepControl step{.step = 5e-3};
  /// Tail fraction beyond 2/3 of the grid Nyquist that raises the warning.
  double alias_threshold = 1e-3;
  int tail_index = 0;  // Sobolev index used for the tail fraction
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct Pushforward {
  double time = 0.0;
  FourierScalarField field;  // box grid/2 - 1
  double tail = 0.0;
  bool aliasing_warning = false;
};

Pushforward pushforward(const FourierScalarField& w, const TrigVelocityField& u, double t,
                        const PushforwardOptions& opt = {});
/// Same at several ascending times, advecting the grid incrementally.
std::vector<Pushforward> pushforward_series(const FourierScalarField& w, const TrigVelocityField& u,
                                            const std::vector<double>& times,
                                            const PushforwardOptions& opt = {});

/// ||w o phi_t||_{H_m} for m in {0, 1} by quadrature in Lagrangian variables:
/// (2 pi)^-2 int |Dphi_{-t}(y)^{-T} grad w(y)|^2 dy, which needs no
/// re-expansion of the stretched field.
std::vector<double> lagrangian_norms(const FourierScalarField& w, const TrigVelocityField& u, int m,
                                     const std::vector<double>& times, int grid,
                                     const flow::StepControl& sc = {.step = 5e-3},
                                     kernels::Exec exec = kernels::Exec::Parallel);

struct SemigroupGrowth {
  int m = 0;
  double value = 0.0;  // slope of log ||w o phi_t||_{H_m} over [T/2, T]
  std::vector<std::pair<double, double>> trace;  // (t, log norm)
  double max_tail = 0.0;
  bool aliasing_warning = false;
  std::string route;  // "pushforward" or "lagrangian"
};

struct GrowthOptions {
  PushforwardOptions push;
  int samples = 9;               // times in [T/2, T]
  double failure_tail = 0.1;     // aliasing failure
};

/// Spectral route: pushforward at each sample time. A tail fraction above
/// failure_tail is an aliasing error.
SemigroupGrowth semigroup_growth(const TrigVelocityField& u, int m, const FourierScalarField& seed,
                                 double T, const GrowthOptions& opt = {});
/// Quadrature route (m in {0, 1}) on a grid of the given size.
SemigroupGrowth semigroup_growth_lagrangian(const TrigVelocityField& u, int m,
                                            const FourierScalarField& seed, double T, int grid,
                                            const GrowthOptions& opt = {});

/// Real mean-zero periodized Gaussian of width sigma centred at c. M = 0
/// picks the box where the coefficients fall below 1e-16 of the peak.
FourierScalarField gaussian_bump(const Vec2& c, double sigma, int M = 0);

// CSV dumps.
void write_spectrum_csv(std::ostream& os, const std::vector<Complex>& values);
/// "k1,k2,k1p,k2p,re,im" for entries with |value| > threshold (scalar kinds).
void write_triplets(std::ostream& os, const GalerkinOperator& op, double threshold = 0.0);

}  // namespace eulerspec::operators
