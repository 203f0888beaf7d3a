#pragma once

#include <string>
#include <vector>

#include "hsl/faddeev.hpp"
#include "hsl/grid.hpp"
#include "hsl/medium.hpp"

namespace hsl {

/// xi = i (t1 e1 + t2 e2) + sqrt(k^2 + t1^2 + t2^2) e3 for an orthonormal triad (e1, e2, e3).
struct CgoParameter {
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 e3 = Vec3::UnitZ();
  double t1 = 0.0;
  double t2 = 0.0;
  double k = 1.0;

  CgoParameter() = default;
  CgoParameter(const Vec3& e1_, const Vec3& e2_, const Vec3& e3_, double t1_, double t2_, double k_);

  CVec3 xi() const;
  double imag_norm() const { return std::hypot(t1, t2); }
  double real_norm() const { return std::sqrt(k * k + t1 * t1 + t2 * t2); }
  /// Rotation taking the canonical (s, i t, 0) form to this xi. Requires imag_norm() > 0.
  FaddeevParameter faddeev() const;
  /// Frame whose first column is e3 and second the direction of Im xi (e1 if Im xi = 0).
  Mat3 frame() const;
};

/// Real plane wave in direction d (unit) at wavenumber k: xi = k d.
CgoParameter plane_wave_parameter(const Vec3& d, double k);

/// Completes a unit vector to a right-handed orthonormal triad (d becomes e3).
Mat3 triad_from(const Vec3& d);

enum class CgoSolverKind { kAuto, kNeumann, kKrylov };

struct CgoOptions {
  double tol = 1e-10;
  CgoSolverKind solver = CgoSolverKind::kAuto;
  int max_neumann = 200;
  int max_krylov = 500;
};

struct CgoSolution {
  CgoParameter parameter;
  Medium medium;
  SpectralField phi;            ///< potential in frame coordinates
  SpectralField q_projected;    ///< band-limited q in frame coordinates
  double residual_norm = 0.0;   ///< relative residual of the fixed-point equation
  int iterations = 0;
  CgoSolverKind solver_used = CgoSolverKind::kNeumann;
  double projection_error = 0.0;  ///< max |q - P q| at the midpoints of the lattice cells

  explicit CgoSolution(const CubeGrid& g) : phi(g), q_projected(g) {}
};

/// Solves (I + G_xi(k^2 q .)) phi = G_xi(-k^2 q). Throws SolverError on non-convergence.
CgoSolution build_cgo(const Medium& q, const CgoParameter& xi, const CubeGrid& grid, const CgoOptions& opts = {});

/// 2 R0 k^2 ||q||_C0 / (pi |Im xi|): the Neumann series contracts when this is <= 1.
double contraction_certificate(const Medium& q, const CgoParameter& xi, double R0);

/// phi(x) and grad phi(x) in working coordinates.
ValueGradient eval_phi(const CgoSolution& sol, const Vec3& x);
/// v = exp(i x.xi) (1 + phi).
cplx eval_v(const CgoSolution& sol, const Vec3& x);
/// grad v = exp(i x.xi) (i xi (1 + phi) + grad phi).
CVec3 eval_grad_v(const CgoSolution& sol, const Vec3& x);

/// ||Delta v + k^2 (1 + q) v|| / ||v|| over lattice nodes of the half-size subcube,
/// with derivatives of phi taken spectrally.
double helmholtz_residual(const CgoSolution& sol);

struct CertificateEntry {
  std::string kind;   ///< L2, H1, H2, H3, C0, gradC0
  double measured = 0.0;
  double bound = 0.0;
  bool applicable = false;
  bool pass = true;   ///< measured <= bound, or not applicable
};

struct CertificateReport {
  double t = 0.0;
  double threshold_l2 = 0.0;     ///< smallest |Im xi| meeting the C0 contraction hypothesis
  double threshold_c2 = 0.0;     ///< max{||q||_C2 2R0k^2/pi, pi/R0, k^2}
  double threshold_remark = 0.0; ///< max{threshold_c2, 2916 R0 k^2 ||q||_H2 C_L / pi}
  double M_G = 0.0;
  double C_L = 0.0;
  std::vector<CertificateEntry> entries;
  bool all_pass() const;
};

/// Norms of phi against the decay bounds. C0 norms are sampled on a lattice twice as fine.
CertificateReport certify_decay(const CgoSolution& sol, double C_L);

/// M_G(t) = (((R0 k^2/pi)(4||q||_C0 + 24) + 27/2) 18 R0 k^2 / (pi t) + 4 R0 k^2 / pi) ||q||_H2.
double cgo_MG(double q_c0, double q_h2, double k, double R0, double t);

struct ContinuityProbe {
  double lhs = 0.0;  ///< |phi_xi1(x0) - phi_xi2(x0)|
  double rhs = 0.0;  ///< 52 C_L (1 + k^2 ||q||_C2)^2 ||phi_xi2||_H3 |xi1 - xi2|
  bool holds() const { return lhs <= rhs; }
};

/// Throws DomainError when either parameter is below the C2 threshold.
ContinuityProbe continuity_probe(const Medium& q, const CgoParameter& xi1, const CgoParameter& xi2, const Vec3& x0,
                                 const CubeGrid& grid, double C_L, const CgoOptions& opts = {});

}  // namespace hsl
