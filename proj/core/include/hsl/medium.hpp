#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "hsl/grid.hpp"
#include "hsl/types.hpp"

namespace hsl {

/// Compactly supported C-infinity bump, normalized so its peak equals `amplitude`:
///   b(x) = amplitude * e * exp(1 / ((|x - center| / radius)^2 - 1))  for |x - center| < radius.
struct Bump {
  double amplitude = 0.0;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Sup norms of a medium measured by dense sampling.
struct MediumNorms {
  double c0 = 0.0;        ///< sup |q|
  double grad_c0 = 0.0;   ///< sup |grad q| (Euclidean)
  double c2_sampled = 0.0;  ///< sum over |beta| <= 2 of sup |d^beta q|
  double c2 = 0.0;        ///< c2_sampled times the safety factor, used in hypothesis thresholds
};

/// Medium perturbation q: a finite sum of bumps; the empty sum is q = 0.
class Medium {
 public:
  static constexpr double kC2SafetyFactor = 3.0;
  static constexpr int kNormLattice = 64;

  Medium() = default;
  explicit Medium(std::vector<Bump> bumps);

  const std::vector<Bump>& bumps() const { return bumps_; }
  bool is_zero() const;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;

  /// Radius of the smallest origin-centred ball containing supp q (0 for q = 0).
  double support_radius() const;
  /// Axis-aligned bounding box of supp q.
  Vec3 box_lo() const;
  Vec3 box_hi() const;

  /// Sup norms sampled on a kNormLattice^3 lattice over the bounding box (computed once).
  const MediumNorms& norms() const;

  /// ||q||_{H^s(D)} by the Fourier characterization of its projection on `grid`.
  double sobolev_norm_on(const CubeGrid& grid, int s) const;

  Medium scaled(double factor) const;

 private:
  std::vector<Bump> bumps_;
  struct NormCache {
    std::once_flag once;
    MediumNorms value;
  };
  std::shared_ptr<NormCache> cache_ = std::make_shared<NormCache>();
  MediumNorms compute_norms() const;
};

/// Band-limited representative of q on `grid` in coordinates y = R^T x (frame columns are
/// the working axes); with the identity frame this is project(grid, q).
SpectralField project_medium(const Medium& q, const CubeGrid& grid, const Mat3& frame = Mat3::Identity());

}  // namespace hsl
