#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hsl/types.hpp"

namespace hsl {

struct PointSource {
  double amplitude = 0.0;
  Vec3 location = Vec3::Zero();
};

/// Configuration of point sources together with the parameters (a_bar, eta, N0)
/// of the admissible set.
struct PointSourceSet {
  std::vector<PointSource> sources;
  double eta = 0.05;
  int N0 = 8;
  double a_bar = 2.0;

  std::size_t size() const { return sources.size(); }
  bool empty() const { return sources.empty(); }
};

/// Sphere of radius rho centred at the origin with a tensor quadrature rule:
/// Gauss-Legendre in cos(theta) times the uniform rule in phi.
class MeasurementSphere {
 public:
  MeasurementSphere(double radius, int n_theta, int n_phi);

  double radius() const { return radius_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return points_.size(); }

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const std::vector<double>& weights() const { return weights_; }
  double theta(std::size_t i) const { return theta_[i / n_phi_]; }
  double phi(std::size_t i) const { return 2.0 * kPi * (i % n_phi_) / n_phi_; }

  /// Surface area 4 pi rho^2.
  double area() const { return 4.0 * kPi * radius_ * radius_; }

 private:
  double radius_;
  int n_theta_, n_phi_;
  std::vector<double> theta_;
  std::vector<Vec3> points_, normals_;
  std::vector<double> weights_;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<std::string> violations;
  explicit operator bool() const { return admissible; }
};

/// Strict membership test for the admissible set relative to the ball bounded by `omega`.
AdmissibilityReport check_admissible(const PointSourceSet& S, const MeasurementSphere& omega);
AdmissibilityReport check_admissible(const PointSourceSet& S, double omega_radius);

/// Draws `count` sources uniformly in the ball of radius omega_radius - 8 eta (rejecting
/// positions closer than 8 eta to earlier ones) with amplitudes uniform in [a_min, a_max).
/// Throws DegenerateInputError when 10000 consecutive draws are rejected.
PointSourceSet random_admissible(std::uint64_t seed, int count, double eta, double omega_radius, double a_min = 0.1,
                                 double a_max = 1.9);

/// Outgoing free-space kernel exp(ik|x-z|) / (4 pi |x-z|). Throws SingularityError at x = z.
cplx green_free(const Vec3& x, const Vec3& z, double k);
/// Gradient with respect to x.
CVec3 green_gradient(const Vec3& x, const Vec3& z, double k);
/// Hessian with respect to x.
Eigen::Matrix3cd green_hessian(const Vec3& x, const Vec3& z, double k);

/// Singular part u0 = -sum a_i Phi(x, z_i); (Delta + k^2) u0 = sum a_i delta_{z_i}.
cplx eval_u0(const PointSourceSet& S, double k, const Vec3& x);
CVec3 eval_grad_u0(const PointSourceSet& S, double k, const Vec3& x);

/// Integral over the ball |x| < radius of an integrand with at most |x - p|^{-2}
/// singularities at the listed interior points. Each singular point gets a share
/// f * w_i of the integrand, w_i = d_i^{-2} / sum_j d_j^{-2}, integrated in spherical
/// coordinates centred at p_i out to the sphere; with no singular points the ball is
/// integrated in origin-centred coordinates. Radial lines are split into panels that
/// double in length outward from a quarter of the closest spacing between centres.
struct BallQuadratureOptions {
  int n_radial = 16;  ///< Gauss points per radial panel
  int n_theta = 24;
  int n_phi = 48;
};
double integrate_ball(const std::function<double(const Vec3&)>& f, double radius,
                      const std::vector<Vec3>& singular_points, const BallQuadratureOptions& opts = {});

/// ||Phi(., z)||_{L^2(B_rho)}; independent of k for real k.
double green_l2_norm(const Vec3& z, double rho, const BallQuadratureOptions& opts = {});

struct U0DifferenceAudit {
  double lhs = 0.0;  ///< ||u_{0,1} - u_{0,2}||_{L^2(Omega)} by quadrature
  double rhs = 0.0;  ///< m1 sum |da| + sum m2_i |dz_i|^alpha
  double m1 = 0.0;   ///< max over z in the closed ball of ||Phi(., z)||_{L^2(Omega)}
  double m2 = 0.0;   ///< largest per-pair m2 coefficient
  bool holds() const { return lhs <= rhs; }
};

/// Audits ||u_{0,1} - u_{0,2}|| <= m1 sum|a_{1,i} - a_{2,p(i)}| + m2 sum|z_{1,i} - z_{2,p(i)}|^alpha
/// with m2 = 4 sqrt(pi) (1 + (2R0)^{3/4})^{1/2} + 2 sqrt(pi) |dz|^{1 - 3 alpha / 2}.
/// `pairing[i]` is the index in S2 matched to source i of S1.
U0DifferenceAudit u0_difference_bound(const PointSourceSet& S1, const PointSourceSet& S2,
                                      const std::vector<int>& pairing, double alpha, double k, double R0,
                                      double omega_radius, const BallQuadratureOptions& opts = {});

}  // namespace hsl
