#pragma once

#include <cmath>

#include "eulerspec/flow.hpp"

namespace eulerspec::detail {

/// Tracks log ||Dphi_t(x)|| without overflow: the frame Q is
/// re-orthonormalized after every advance and the triangular factor is kept
/// at unit scale with the logarithm of the scale accumulated separately.
class NormTracker {
 public:
  explicit NormTracker(const Vec2& x) { state_.position = x; }

  void advance(const fields::TrigVelocityField& u, double dt, const flow::StepControl& sc) {
    state_.M = Q_;
    double t0 = state_.time;
    state_ = flow::continue_tangent(u, state_, dt, sc);
    state_.time = t0 + dt;
    const Mat2& M = state_.M;
    Vec2 a = M.col(0);
    double r11 = a.norm();
    Vec2 q1 = a / r11;
    double r12 = q1.dot(M.col(1));
    Vec2 b = M.col(1) - r12 * q1;
    double r22 = b.norm();
    Vec2 q2 = r22 > 0.0 ? Vec2(b / r22) : perp(q1);
    Q_.col(0) = q1;
    Q_.col(1) = q2;
    Mat2 Rn;
    Rn << r11, r12, 0.0, r22;
    R_ = Rn * R_;
    double c = R_.cwiseAbs().maxCoeff();
    R_ /= c;
    log_scale_ += std::log(c);
  }

  double time() const { return state_.time; }
  const Vec2& position() const { return state_.position; }
  double log_norm() const { return log_scale_ + std::log(spectral_norm(R_)); }

 private:
  flow::CocycleState state_;
  Mat2 Q_ = Mat2::Identity();
  Mat2 R_ = Mat2::Identity();
  double log_scale_ = 0.0;
};

}  // namespace eulerspec::detail
