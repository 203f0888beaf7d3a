#include "hsl/faddeev.hpp"

#include <cmath>

namespace hsl {

FaddeevParameter::FaddeevParameter(double s_, double t_, const Mat3& frame_) : s(s_), t(t_), frame(frame_) {
  if (!(t_ > 0.0)) throw DomainError("FaddeevParameter: t must be positive");
  if (!(frame_.transpose() * frame_ - Mat3::Identity()).isZero(1e-12))
    throw DomainError("FaddeevParameter: frame is not orthonormal");
}

cplx denominator(const Vec3& alpha, const FaddeevParameter& xi) {
  return {alpha.squaredNorm() + 2.0 * xi.s * alpha(0), 2.0 * xi.t * alpha(1)};
}

cplx denominator(const FrequencyIndex& m, double R0, const FaddeevParameter& xi) {
  return denominator(m.alpha(R0), xi);
}

SpectralField apply_G(const SpectralField& F, const FaddeevParameter& xi) {
  SpectralField out(F.grid);
  for (std::size_t p = 0; p < F.coeffs.size(); ++p)
    out.coeffs[p] = -F.coeffs[p] / denominator(F.grid.frequency(p), xi);
  return out;
}

SpectralField apply_faddeev_operator(const SpectralField& F, const FaddeevParameter& xi) {
  SpectralField out(F.grid);
  for (std::size_t p = 0; p < F.coeffs.size(); ++p)
    out.coeffs[p] = -F.coeffs[p] * denominator(F.grid.frequency(p), xi);
  return out;
}

BoundCheck l2_bound_check(const SpectralField& F, const FaddeevParameter& xi) {
  const double R0 = F.grid.R0();
  return {sobolev_norm(apply_G(F, xi), 0), R0 / (kPi * xi.t) * sobolev_norm(F, 0)};
}

BoundCheck gradient_bound_check(const SpectralField& F, const FaddeevParameter& xi) {
  const SpectralField g = apply_G(F, xi);
  BoundCheck out;
  for (int axis = 0; axis < 3; ++axis) out.lhs += sobolev_norm(spectral_derivative(g, axis), 0);
  const double R0 = F.grid.R0();
  const double s = std::abs(xi.s);
  out.rhs = R0 / kPi * (s + std::sqrt(s * s + kPi * xi.t / R0)) / xi.t * sobolev_norm(F, 0);
  return out;
}

}  // namespace hsl
