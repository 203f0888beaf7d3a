#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hsl/inversion.hpp"

namespace hsl {

// ---------------------------------------------------------------------------------------------
// Embedding constant of H^2(D) into C^0(D) for band-limited fields.

/// sup |f| over the lattice nodes divided by ||f||_{H^2}.
double embedding_ratio(const SpectralField& f);

struct EmbeddingEstimate {
  double value = 0.0;          ///< the largest ratio seen; used as the working C_L
  double peaked_ratio = 0.0;   ///< candidate sum (1 + |alpha|^2)^{-1} e_alpha
  double optimal_ratio = 0.0;  ///< candidate sum (1 + |alpha|^2)^{-2} e_alpha, which attains the sup
  double best_random = 0.0;
  int trials = 0;
};

/// Lower estimate of C_L on the given grid from random trial fields plus the two candidates.
EmbeddingEstimate estimate_CL(const CubeGrid& grid, std::uint64_t seed = 1, int trials = 500);

// ---------------------------------------------------------------------------------------------
// Smooth cut-off functions.

struct CutoffSample {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  double laplacian = 0.0;
};

/// chi = f * g_{eta/2} with f the indicator of |x - z| >= 3 eta / 2 and g the normalized
/// exp(1 / (|x|^2 - 1)) bump: 0 on B_eta(z), 1 outside B_{2 eta}(z).
class MollifiedCutoff {
 public:
  MollifiedCutoff(const Vec3& centre, double eta);

  const Vec3& centre() const { return centre_; }
  double eta() const { return eta_; }
  CutoffSample eval(const Vec3& x) const;
  /// Radial profile and its first two derivatives in r = |x - centre|.
  void radial(double r, double& value, double& d1, double& d2) const;

 private:
  Vec3 centre_;
  double eta_;
};

/// Product of mollified cut-offs; throws DegenerateInputError when two B_{2 eta} balls overlap.
class ProductCutoff {
 public:
  ProductCutoff(const std::vector<Vec3>& centres, double eta);
  CutoffSample eval(const Vec3& x) const;
  const std::vector<MollifiedCutoff>& factors() const { return factors_; }

 private:
  std::vector<MollifiedCutoff> factors_;
};

struct CutoffMeasurement {
  double min_value = 0.0;
  double max_value = 0.0;
  double max_gradient = 0.0;
  double max_laplacian = 0.0;
  double gradient_constant = 0.0;   ///< max |grad chi| * eta
  double laplacian_constant = 0.0;  ///< max |Delta chi| * eta^2
  bool zero_plateau = true;         ///< chi == 0 exactly at every sample in the eta balls
  bool one_plateau = true;          ///< chi == 1 exactly at every sample outside the 2 eta balls
  std::size_t samples = 0;
};

/// Dense lattice sampling (n^3 points) of the cube of half side `half_width` around the origin.
CutoffMeasurement measure_cutoff(const ProductCutoff& chi, double half_width, int n);

// ---------------------------------------------------------------------------------------------
// Carleman inequality.

struct ExcludedBall {
  Vec3 centre = Vec3::Zero();
  double radius = 0.0;
};

struct DomainQuadrature {
  int n_radial = 96;  ///< Gauss points per radial interval
  int n_theta = 24;
  int n_phi = 48;
};

/// omega = B_rho(0) minus closed excluded balls, which must be disjoint and strictly inside.
/// Volume nodes come from rays through the origin split at the excluded balls; the boundary
/// consists of the outer sphere and the excluded spheres.
class AnnularDomain {
 public:
  AnnularDomain(double outer_radius, std::vector<ExcludedBall> excluded, const DomainQuadrature& quad = {});

  double outer_radius() const { return outer_radius_; }
  const std::vector<ExcludedBall>& excluded() const { return excluded_; }
  bool contains(const Vec3& x) const;
  /// True when omega stays at distance >= eps from z0.
  bool avoids(const Vec3& z0, double eps) const;

  const std::vector<Vec3>& volume_nodes() const { return vol_nodes_; }
  const std::vector<double>& volume_weights() const { return vol_weights_; }
  const std::vector<Vec3>& boundary_nodes() const { return bdy_nodes_; }
  const std::vector<double>& boundary_weights() const { return bdy_weights_; }

 private:
  double outer_radius_;
  std::vector<ExcludedBall> excluded_;
  std::vector<Vec3> vol_nodes_, bdy_nodes_;
  std::vector<double> vol_weights_, bdy_weights_;
};

/// Closed-form field with value, gradient and Laplacian.
struct TestField {
  std::string name;
  std::function<ValueGradient(const Vec3&)> eval;
  std::function<cplx(const Vec3&)> laplacian;
};

TestField plane_wave_field(const Vec3& direction, double k);
/// Phi(., z) = exp(ik|x - z|) / (4 pi |x - z|); z must lie outside the domain.
TestField green_field(const Vec3& z, double k);
/// exp(a . x) for a real vector a.
TestField exponential_field(const Vec3& a);
/// Bump times plane wave; A u does not vanish.
TestField bump_wave_field(const Bump& bump, const Vec3& direction, double k);
TestField scaled_sum(const TestField& f, cplx a, const TestField& g, cplx b);

/// Deterministic mix of the field types above with singular points placed in `singular_ball`.
std::vector<TestField> carleman_test_fields(int count, std::uint64_t seed, double k, const ExcludedBall& singular_ball);

/// max{2, k^2 (1 + |q|_C) / eps, k^2 |grad q|_C / eps, 1 / eps^2}.
double tau0(double k, double q_c0, double q_grad_c0, double eps);

struct CarlemanRow {
  double tau = 0.0;
  double lhs = 0.0;  ///< tau^2 ||e^{tau phi} u||^2 + tau ||e^{tau phi} grad u||^2 over omega
  double rhs = 0.0;  ///< ||e^{tau phi} A u||^2 + tau^3 ||e^{tau phi} u||^2_b + tau ||e^{tau phi} grad u||^2_b
  double c_emp = 0.0;
  double proof_constant = 0.0;  ///< coefficient structure of the explicit final display
  double log_scale = 0.0;       ///< both sides are multiplied by exp(-log_scale)
};

struct CarlemanReport {
  std::vector<CarlemanRow> rows;
  double tau0 = 0.0;
  bool hypothesis_met = true;  ///< every tau >= tau0, omega inside B_{R0/2} and away from B_eps(z0)
  double c_min = 0.0;
  double c_max = 0.0;
  bool within_proof_constant = true;
};

/// Weight phi = |x - z0|^2, A = Delta + k^2 (1 + q). The weights are shifted by the maximum of
/// phi over the quadrature nodes, which cancels in c_emp.
CarlemanReport carleman_check(const TestField& u, const AnnularDomain& omega, const Vec3& z0, double k, const Medium& q,
                              const std::vector<double>& taus, double eps, double R0);

// ---------------------------------------------------------------------------------------------
// Holder stability of the Cauchy problem and of the multi-source recovery.

/// theta = 5 eta^2 / (2 + R0^2 - 4 eta^2).
double holder_theta(double eta, double R0);
/// exp(-(2 + R0^2 - 4 eta^2) tau1) M_u / eta.
double epsilon0(double tau1, double R0, double eta, double M_u);

struct HolderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
/// Least-squares line through (log eps, log err). Needs at least 4 pairs, all positive.
HolderFit holder_fit(const std::vector<double>& eps, const std::vector<double>& err);

/// Norms of a field on a ball with excluded balls.
struct FieldNorms {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

/// Value, gradient and Hessian of a complex field.
struct FieldJet {
  cplx value = 0.0;
  CVec3 gradient = CVec3::Zero();
  Eigen::Matrix3cd hessian = Eigen::Matrix3cd::Zero();
};

/// Lattice quadrature with the sharp indicator of B_R(0) minus the closed excluded balls:
/// nodes carry equal cell volumes and jets[i] belongs to nodes[i].
FieldNorms domain_norms(const std::vector<Vec3>& nodes, double cell_volume, const std::vector<FieldJet>& jets,
                        double outer_radius, const std::vector<ExcludedBall>& excluded);

/// Balls of radius factor * eta around every source of S1 and around the sources of S2 left
/// unmatched by match_sources.
std::vector<ExcludedBall> source_balls(const PointSourceSet& S1, const PointSourceSet& S2, double eta, double factor);

struct StabilityOptions {
  std::vector<double> eps{1e-5, 1e-4, 1e-3, 1e-2};
  int seeds = 4;
  std::uint64_t seed = 1;
  double omega_radius = 0.95;
  int n_theta = 24;
  int n_phi = 48;
  int forward_n = 32;
  bool single_source = false;  ///< recover_single_source from the imaging maximum instead
  MultiRecoveryOptions recovery;
  int lattice_n = 40;          ///< per-axis lattice for the interior norms (0 skips them)
  double R0 = 2.0;             ///< enters theta
};

struct StabilityRow {
  double eps = 0.0;
  std::uint64_t seed = 0;
  double data_misfit = 0.0;   ///< H^1 + L^2 misfit of u1 - u2 on the sphere
  double err_a = 0.0;         ///< max over matched |a1 - a2|, plus unmatched amplitudes
  double err_z = 0.0;         ///< max over matched a1 |z1 - z2|
  double h1_interior = 0.0;   ///< ||u1 - u2||_{H^1(Omega_{eta,3})}
  double h2_inner = 0.0;      ///< ||u1 - u2||_{H^2(Omega_{eta,1})}
  double bound = 0.0;         ///< sqrt(2) (M_u / eta)^{1 - theta} data_misfit^theta
  bool matching_ok = false;   ///< every true source matched and nothing else recovered
  int recovered = 0;
  std::string failure;        ///< solver failure message, empty on success
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  double theta = 0.0;
  double M_u = 0.0;  ///< max h2_inner over the run
  double breakdown_eps = 0.0;  ///< smallest eps with a failed matching (0 if none)
};

/// For each (eps, seed): perturbs the exact data of S1, recovers S2 from it and measures the
/// parameter errors and the interior norms of u1 - u2.
StabilityTable cauchy_stability_experiment(const PointSourceSet& S1, const Medium& q, double k, double eta,
                                           const StabilityOptions& opts);

}  // namespace hsl
