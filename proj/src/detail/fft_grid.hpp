#pragma once

// Square periodic grid x_ij = 2 pi (i, j) / G with FFTW transforms between
// nodal values and Fourier coefficients, f(x) = sum_k c_k e^{ik.x}.

#include <fftw3.h>

#include <vector>

#include "eulerspec/fields.hpp"

namespace eulerspec::detail {

class FftGrid {
 public:
  explicit FftGrid(int G) : g_(G), buf_(std::size_t(G) * std::size_t(G)) {
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_2d(G, G, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(G, G, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftGrid() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  int size() const { return g_; }
  std::size_t slot(int k1, int k2) const {
    auto wrap = [&](int k) { return std::size_t(((k % g_) + g_) % g_); };
    return wrap(k1) * std::size_t(g_) + wrap(k2);
  }

  /// Nodal values of sum_k coeff(k) e^{ik.x} over |k_i| <= M (mean given
  /// separately); requires 2M < G.
  template <class Coeff>
  std::vector<Complex> synthesize(int M, Complex mean, Coeff coeff) {
    std::fill(buf_.begin(), buf_.end(), Complex{});
    buf_[0] = mean;
    for (int a = -M; a <= M; ++a)
      for (int b = -M; b <= M; ++b)
        if (a != 0 || b != 0) buf_[slot(a, b)] += coeff(fields::ModeIndex{a, b});
    fftw_execute(bwd_);
    return buf_;
  }

  /// Coefficients c_k = G^-2 sum_j f(x_j) e^{-ik.x_j}; read with coeff().
  void analyze(const std::vector<Complex>& values) {
    buf_ = values;
    fftw_execute(fwd_);
    const double s = 1.0 / (double(g_) * double(g_));
    for (auto& c : buf_) c *= s;
  }
  Complex coeff(const fields::ModeIndex& k) const { return buf_[slot(k.k1, k.k2)]; }

  Vec2 node(std::size_t i) const {
    const double h = kTwoPi / g_;
    return {double(i / std::size_t(g_)) * h, double(i % std::size_t(g_)) * h};
  }

 private:
  int g_;
  std::vector<Complex> buf_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

}  // namespace eulerspec::detail
