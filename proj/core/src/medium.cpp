#include "hsl/medium.hpp"

#include <algorithm>
#include <cmath>

namespace hsl {
namespace {

constexpr double kE = 2.718281828459045;

struct BumpLocal {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

// Value and derivatives of amplitude * e * exp(1/(s^2 - 1)), s = |x - c| / rho.
BumpLocal evaluate_bump(const Bump& b, const Vec3& x, int order) {
  BumpLocal out;
  const Vec3 d = x - b.center;
  const double rho2 = b.radius * b.radius;
  const double w = d.squaredNorm() / rho2 - 1.0;
  if (w >= 0.0) return out;
  const double g = b.amplitude * kE * std::exp(1.0 / w);
  out.value = g;
  if (order < 1) return out;
  const double p = -2.0 / (rho2 * w * w);
  out.gradient = g * p * d;
  if (order < 2) return out;
  const double c = p * p + 8.0 / (rho2 * rho2 * w * w * w);
  out.hessian = g * (c * d * d.transpose() + p * Mat3::Identity());
  return out;
}

}  // namespace

Medium::Medium(std::vector<Bump> bumps) : bumps_(std::move(bumps)) {
  for (const auto& b : bumps_) {
    if (!(b.radius > 0.0)) throw DomainError("Medium: bump radius must be positive");
    if (!std::isfinite(b.amplitude)) throw DomainError("Medium: bump amplitude must be finite");
  }
}

bool Medium::is_zero() const {
  return std::all_of(bumps_.begin(), bumps_.end(), [](const Bump& b) { return b.amplitude == 0.0; });
}

double Medium::value(const Vec3& x) const {
  double q = 0.0;
  for (const auto& b : bumps_) q += evaluate_bump(b, x, 0).value;
  return q;
}

Vec3 Medium::gradient(const Vec3& x) const {
  Vec3 g = Vec3::Zero();
  for (const auto& b : bumps_) g += evaluate_bump(b, x, 1).gradient;
  return g;
}

Mat3 Medium::hessian(const Vec3& x) const {
  Mat3 h = Mat3::Zero();
  for (const auto& b : bumps_) h += evaluate_bump(b, x, 2).hessian;
  return h;
}

double Medium::support_radius() const {
  double r = 0.0;
  for (const auto& b : bumps_)
    if (b.amplitude != 0.0) r = std::max(r, b.center.norm() + b.radius);
  return r;
}

Vec3 Medium::box_lo() const {
  Vec3 lo = Vec3::Constant(0.0);
  bool first = true;
  for (const auto& b : bumps_) {
    if (b.amplitude == 0.0) continue;
    const Vec3 p = b.center - Vec3::Constant(b.radius);
    lo = first ? p : Vec3(lo.cwiseMin(p));
    first = false;
  }
  return lo;
}

Vec3 Medium::box_hi() const {
  Vec3 hi = Vec3::Constant(0.0);
  bool first = true;
  for (const auto& b : bumps_) {
    if (b.amplitude == 0.0) continue;
    const Vec3 p = b.center + Vec3::Constant(b.radius);
    hi = first ? p : Vec3(hi.cwiseMax(p));
    first = false;
  }
  return hi;
}

const MediumNorms& Medium::norms() const {
  std::call_once(cache_->once, [this] { cache_->value = compute_norms(); });
  return cache_->value;
}

MediumNorms Medium::compute_norms() const {
  MediumNorms out;
  if (!is_zero()) {
    const Vec3 lo = box_lo(), hi = box_hi();
    const int n = kNormLattice;
    double sup_q = 0.0, sup_grad = 0.0;
    Vec3 sup_d1 = Vec3::Zero();
    Mat3 sup_d2 = Mat3::Zero();
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k) {
          const Vec3 x = lo + (hi - lo).cwiseProduct(Vec3(i, j, k) / n);
          double q = 0.0;
          Vec3 g = Vec3::Zero();
          Mat3 h = Mat3::Zero();
          for (const auto& b : bumps_) {
            const BumpLocal l = evaluate_bump(b, x, 2);
            q += l.value;
            g += l.gradient;
            h += l.hessian;
          }
          sup_q = std::max(sup_q, std::abs(q));
          sup_grad = std::max(sup_grad, g.norm());
          sup_d1 = sup_d1.cwiseMax(g.cwiseAbs());
          sup_d2 = sup_d2.cwiseMax(h.cwiseAbs());
        }
    // Bump peaks sit at the centres, which need not be lattice nodes.
    for (const auto& b : bumps_) sup_q = std::max(sup_q, std::abs(value(b.center)));
    out.c0 = sup_q;
    out.grad_c0 = sup_grad;
    double c2 = sup_q + sup_d1.sum();
    for (int a = 0; a < 3; ++a)
      for (int c = a; c < 3; ++c) c2 += sup_d2(a, c);
    out.c2_sampled = c2;
    out.c2 = kC2SafetyFactor * c2;
  }
  return out;
}

double Medium::sobolev_norm_on(const CubeGrid& grid, int s) const {
  return sobolev_norm(project_medium(*this, grid), s);
}

Medium Medium::scaled(double factor) const {
  std::vector<Bump> b = bumps_;
  for (auto& x : b) x.amplitude *= factor;
  return Medium(std::move(b));
}

SpectralField project_medium(const Medium& q, const CubeGrid& grid, const Mat3& frame) {
  return project(grid, [&](const Vec3& y) { return cplx(q.value(frame * y)); });
}

}  // namespace hsl
