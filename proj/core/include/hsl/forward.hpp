#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hsl/medium.hpp"
#include "hsl/sources.hpp"

namespace hsl {

/// Cell-centred lattice on the cube (-b, b)^3: x_j = -b + (j + 1/2) h, h = 2b / n.
struct VolumeLattice {
  double half_side = 1.0;
  int n = 32;

  VolumeLattice() = default;
  VolumeLattice(double half_side_, int n_);
  double spacing() const { return 2.0 * half_side / n; }
  double cell_volume() const { const double h = spacing(); return h * h * h; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  double coordinate(int j) const { return -half_side + (j + 0.5) * spacing(); }
  Vec3 node(std::size_t flat) const;
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(i) * n + j) * n + k; }
};

/// Lattice covering the measurement ball with a margin, shared by every solve in a scenario.
VolumeLattice lattice_for(double omega_radius, int n);

/// k^2 int Phi(x - y) g(y) dy at the lattice nodes for g sampled on the lattice and vanishing
/// near the cube faces. The kernel is truncated at the lattice diameter and convolved on a
/// padded periodic grid using its exact Fourier transform, so the only error is the
/// trapezoid error of g.
class VolumePotential {
 public:
  VolumePotential(const VolumeLattice& lattice, double k);

  const VolumeLattice& lattice() const { return lattice_; }
  double k() const { return k_; }
  int padded_n() const { return m_; }

  std::vector<cplx> apply(const std::vector<cplx>& g) const;

  /// Value, gradient (3) and Hessian (xx, yy, zz, xy, xz, yz) of the potential at the nodes;
  /// `order` 0, 1 or 2 selects how many of the 1 + 3 + 6 fields are returned.
  std::vector<std::vector<cplx>> apply_with_derivatives(const std::vector<cplx>& g, int order) const;

  /// Fourier transform of the truncated kernel, (1/kappa) int_0^L exp(ikr) sin(kappa r) dr.
  static cplx truncated_kernel(double kappa, double k, double L);

 private:
  std::vector<cplx> spectrum(const std::vector<cplx>& g) const;
  std::vector<cplx> crop(std::vector<cplx>& padded) const;

  VolumeLattice lattice_;
  double k_;
  int m_;
  double period_;
  std::vector<cplx> kernel_;  // already scaled by k^2 h^3 / (P^3)
};

/// V_q phi = k^2 int Phi(x, y) q(y) phi(y) dy on the lattice.
std::vector<cplx> apply_Vq(const std::vector<cplx>& phi, const Medium& q, double k, const VolumeLattice& lattice);

enum class ForwardSolverKind { kKrylov, kNeumann };

struct ForwardOptions {
  int n = 32;
  double tol = 1e-10;
  double omega_radius = 0.9 * kPi / 2.0;
  ForwardSolverKind solver = ForwardSolverKind::kKrylov;
  int max_iter = 500;
  int restart = 40;
  bool check_admissibility = true;
};

/// Incident Helmholtz solution with its gradient, for scattering solves.
struct IncidentField {
  std::function<cplx(const Vec3&)> value;
  std::function<CVec3(const Vec3&)> gradient;
};

/// u = u0 + w with u0 the closed-form singular part and w = k^2 int Phi q u.
struct FieldSolution {
  PointSourceSet sources;
  Medium medium;
  double k = 1.0;
  VolumeLattice lattice;
  std::vector<cplx> w;        ///< smooth part at the lattice nodes
  std::vector<cplx> density;  ///< q u at the lattice nodes
  double residual = 0.0;
  int iterations = 0;

  /// w and grad w by direct quadrature of the potential; accurate away from supp q.
  cplx eval_w(const Vec3& x) const;
  CVec3 eval_grad_w(const Vec3& x) const;
  /// u0 (or the incident field) plus w.
  cplx eval_u(const Vec3& x) const;
  CVec3 eval_grad_u(const Vec3& x) const;

  /// w with its lattice derivatives, see VolumePotential::apply_with_derivatives.
  std::vector<std::vector<cplx>> lattice_fields(int order) const;

  std::vector<std::size_t> support;  ///< lattice indices with q != 0
  IncidentField incident;            ///< set by solve_scattering only
};

/// Solves the Lippmann-Schwinger equation for w:  (I - V_q) w = V_q u0.
FieldSolution solve_forward(const PointSourceSet& S, const Medium& q, double k, const ForwardOptions& opts = {});

/// Total field u = u_inc + w for an incident solution: (I - V_q) w = V_q u_inc.
FieldSolution solve_scattering(const IncidentField& inc, const Medium& q, double k, const ForwardOptions& opts = {});

struct CauchyData {
  MeasurementSphere sphere;
  std::vector<cplx> u;
  std::vector<cplx> dnu;

  explicit CauchyData(const MeasurementSphere& s) : sphere(s), u(s.size()), dnu(s.size()) {}
};

/// Traces of u and its normal derivative on the sphere. Throws DomainError when the
/// sphere comes within 2 eta of a source or of supp q.
CauchyData extract_cauchy(const FieldSolution& sol, const MeasurementSphere& sphere);

CauchyData operator-(const CauchyData& a, const CauchyData& b);
CauchyData operator+(const CauchyData& a, const CauchyData& b);
CauchyData operator*(double s, const CauchyData& a);

/// Real orthonormal spherical harmonic Y_lm(theta, phi), |m| <= l.
double real_sph_harmonic(int l, int m, double theta, double phi);

/// Coefficients int_{S^2} f Y_lm dOmega for l <= lmax in order (l, m = -l..l).
std::vector<cplx> sph_coefficients(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax);

/// ||f||_{L2(sphere)} and ||f||_{H1(sphere)} from the degree <= lmax expansion:
///   ||f||_{H1}^2 = sum (rho^2 + l(l+1)) |f_lm|^2.
double boundary_l2_norm(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax);
double boundary_h1_norm(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax);

/// Largest degree resolved exactly by the sphere's quadrature for products of two harmonics.
int default_lmax(const MeasurementSphere& sphere);

/// ||du||_{H1} + ||d(dnu)||_{L2} of a data difference.
double cauchy_misfit(const CauchyData& d, int lmax);

/// Adds pseudo-random spherical-harmonic perturbations of degree <= 8 to u and dnu, scaled
/// so that ||du||_{H1} + ||d(dnu)||_{L2} = eps. Deterministic per seed.
CauchyData perturb_cauchy(const CauchyData& data, double eps, std::uint64_t seed);
constexpr int kNoiseDegree = 8;

struct ForwardStabilityReport {
  double field_difference = 0.0;   ///< ||u1 - u2||_{L2(Omega^rho)} on the lattice
  double medium_term = 0.0;        ///< ||q1 - q2||_C0 (sampled)
  double source_term = 0.0;        ///< ||u01 - u02||_{L2(Omega)}
  double ratio = 0.0;              ///< field_difference / (medium_term + source_term), 0 when both vanish
};

/// Compares two forward solutions (different sources and media) away from balls of radius rho around every source.
ForwardStabilityReport forward_stability_probe(const PointSourceSet& S1, const PointSourceSet& S2, const Medium& q1,
                                               const Medium& q2, double k, double rho_excl,
                                               const ForwardOptions& opts = {});

/// ||u||_{L2(Omega)} / ||u0||_{L2(Omega)} for a solved field.
double forward_bound_ratio(const FieldSolution& sol, double omega_radius);

}  // namespace hsl
