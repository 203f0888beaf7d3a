#pragma once

#include "hsl/grid.hpp"

namespace hsl {

/// xi = (s, i t, 0) in frame coordinates. Frame columns are the working-space images of
/// the canonical axes, so a working point x has frame coordinates y = frame^T x.
struct FaddeevParameter {
  double s = 0.0;
  double t = 1.0;
  Mat3 frame = Mat3::Identity();

  FaddeevParameter() = default;
  FaddeevParameter(double s_, double t_, const Mat3& frame_ = Mat3::Identity());
};

/// alpha.alpha + 2 xi.alpha = |alpha|^2 + 2 s alpha_1 + 2 i t alpha_2.
cplx denominator(const Vec3& alpha, const FaddeevParameter& xi);
cplx denominator(const FrequencyIndex& m, double R0, const FaddeevParameter& xi);

/// G_xi f = -sum f_hat(alpha) / (alpha.alpha + 2 xi.alpha) e_alpha, F given in frame coordinates.
SpectralField apply_G(const SpectralField& F, const FaddeevParameter& xi);

/// (Delta + 2 i xi.grad) in coefficient space, the exact inverse of apply_G.
SpectralField apply_faddeev_operator(const SpectralField& F, const FaddeevParameter& xi);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

/// ||G_xi f|| against (R0 / (pi t)) ||f||.
BoundCheck l2_bound_check(const SpectralField& F, const FaddeevParameter& xi);

/// sum_i ||d_i G_xi f|| against (R0/pi) (|s| + sqrt(s^2 + pi t / R0)) / t ||f||.
BoundCheck gradient_bound_check(const SpectralField& F, const FaddeevParameter& xi);

}  // namespace hsl
