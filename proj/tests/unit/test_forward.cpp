#include <gtest/gtest.h>

#include <cmath>

#include "hsl/forward.hpp"
#include "hsl/quadrature.hpp"

using namespace hsl;

namespace {

const double kOmega = 1.3;

ForwardOptions options(int n) {
  ForwardOptions o;
  o.n = n;
  o.omega_radius = kOmega;
  return o;
}

PointSourceSet single(double a, const Vec3& z) {
  PointSourceSet S;
  S.sources = {{a, z}};
  return S;
}

// k^2 int Phi(x - y) q(y) dy for a radial q, by the addition theorem in one radial variable.
cplx radial_potential(const Medium& q, double k, double r) {
  const QuadratureRule gl = gauss_legendre(200, 0.0, q.bumps()[0].radius);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double s = gl.nodes[i];
    const double lo = std::min(r, s), hi = std::max(r, s);
    const double j0 = lo == 0.0 ? 1.0 : std::sin(k * lo) / (k * lo);
    const cplx h0 = std::exp(kI * k * hi) / (kI * k * hi);
    sum += gl.weights[i] * q.value(Vec3(s, 0, 0)) * s * s * j0 * h0;
  }
  return k * k * kI * k * sum;
}

}  // namespace

TEST(VolumePotential, ZeroInputsGiveZero) {
  const VolumeLattice lat = lattice_for(kOmega, 16);
  const Medium q({Bump{1.0, Vec3::Zero(), 0.8}});
  const std::vector<cplx> ones(lat.size(), 1.0), zeros(lat.size(), 0.0);
  for (const auto& v : apply_Vq(ones, Medium(), 2.0, lat)) EXPECT_EQ(v, cplx(0.0));
  for (const auto& v : apply_Vq(zeros, q, 2.0, lat)) EXPECT_EQ(v, cplx(0.0));
}

TEST(VolumePotential, KernelTransformLimits) {
  const double L = 3.0;
  // Continuity at kappa = 0 and at kappa = k (series branch).
  EXPECT_NEAR(std::abs(VolumePotential::truncated_kernel(1e-7, 2.0, L) - VolumePotential::truncated_kernel(0.0, 2.0, L)),
              0.0, 1e-6);
  EXPECT_NEAR(std::abs(VolumePotential::truncated_kernel(2.0 + 1e-9, 2.0, L) -
                       VolumePotential::truncated_kernel(2.0 + 1e-3, 2.0, L)),
              0.0, 1e-2);
  // Direct quadrature of (1/kappa) int_0^L exp(ikr) sin(kappa r) dr.
  const QuadratureRule gl = gauss_legendre(200, 0.0, L);
  for (double kappa : {0.5, 2.0, 7.3}) {
    cplx ref = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      ref += gl.weights[i] * std::exp(kI * 2.0 * gl.nodes[i]) * std::sin(kappa * gl.nodes[i]);
    EXPECT_NEAR(std::abs(VolumePotential::truncated_kernel(kappa, 2.0, L) - ref / kappa), 0.0, 1e-12);
  }
}

TEST(VolumePotential, MatchesRadialOracle) {
  const double k = 2.0;
  const Medium q({Bump{1.0, Vec3::Zero(), 1.0}});
  const VolumeLattice lat = lattice_for(kOmega, 32);
  const std::vector<cplx> V = apply_Vq(std::vector<cplx>(lat.size(), 1.0), q, k, lat);
  double err_out = 0.0, err_all = 0.0, ref = 0.0;
  for (std::size_t p = 0; p < lat.size(); ++p) {
    const Vec3 x = lat.node(p);
    if (x.norm() > kOmega) continue;
    const cplx r = radial_potential(q, k, x.norm());
    err_all = std::max(err_all, std::abs(V[p] - r));
    if (x.norm() > 1.05) err_out = std::max(err_out, std::abs(V[p] - r) / std::abs(r));
    ref = std::max(ref, std::abs(r));
  }
  EXPECT_LE(err_out, 1e-3);
  EXPECT_LE(err_all, 1e-3 * ref);
}

TEST(SolveForward, ZeroMediumIsExact) {
  const auto S = single(1.0, Vec3(0.1, 0.2, 0.0));
  const FieldSolution sol = solve_forward(S, Medium(), 2.0, options(16));
  for (const auto& w : sol.w) EXPECT_EQ(w, cplx(0.0));
  const MeasurementSphere sph(kOmega, 10, 20);
  const CauchyData d = extract_cauchy(sol, sph);
  for (std::size_t i = 0; i < sph.size(); ++i) {
    const Vec3& x = sph.points()[i];
    EXPECT_NEAR(std::abs(d.u[i] + green_free(x, S.sources[0].location, 2.0)), 0.0, 1e-15);
    const cplx dn = -bilinear_dot(green_gradient(x, S.sources[0].location, 2.0), sph.normals()[i].cast<cplx>());
    EXPECT_NEAR(std::abs(d.dnu[i] - dn), 0.0, 1e-15);
  }
}

TEST(SolveForward, RejectsInadmissibleSources) {
  PointSourceSet S;
  S.sources = {{1.0, Vec3(0.0, 0, 0)}, {1.0, Vec3(0.1, 0, 0)}};
  EXPECT_THROW(solve_forward(S, Medium(), 1.0, options(16)), DomainError);
}

TEST(SolveForward, NeumannAndKrylovAgree) {
  const auto S = single(1.0, Vec3(-0.4, 0.1, 0.0));
  const Medium q({Bump{0.3, Vec3(0.3, 0, 0), 0.5}});
  ForwardOptions o = options(24);
  o.solver = ForwardSolverKind::kNeumann;
  const FieldSolution a = solve_forward(S, q, 2.0, o);
  o.solver = ForwardSolverKind::kKrylov;
  const FieldSolution b = solve_forward(S, q, 2.0, o);
  double diff = 0.0, ref = 0.0;
  for (std::size_t p = 0; p < a.w.size(); ++p) {
    diff = std::max(diff, std::abs(a.w[p] - b.w[p]));
    ref = std::max(ref, std::abs(b.w[p]));
  }
  EXPECT_GT(ref, 0.0);
  EXPECT_LE(diff, 1e-6 * ref);
  EXPECT_LE(b.residual, 1e-10);
}

TEST(SolveForward, LinearInAmplitudes) {
  const Medium q({Bump{0.3, Vec3(0.3, 0, 0), 0.5}});
  const MeasurementSphere sph(kOmega, 8, 16);
  const CauchyData one = extract_cauchy(solve_forward(single(0.5, Vec3(-0.4, 0.1, 0)), q, 2.0, options(16)), sph);
  const CauchyData two = extract_cauchy(solve_forward(single(1.0, Vec3(-0.4, 0.1, 0)), q, 2.0, options(16)), sph);
  const CauchyData d = two - 2.0 * one;
  for (std::size_t i = 0; i < sph.size(); ++i) {
    EXPECT_NEAR(std::abs(d.u[i]), 0.0, 1e-10 * std::abs(two.u[i]));
    EXPECT_NEAR(std::abs(d.dnu[i]), 0.0, 1e-10 * std::abs(two.dnu[i]));
  }
}

// Green's identity with a plane wave v: the boundary pairing equals a v(z) minus the
// volume term k^2 int q u v, evaluated independently on the lattice.
TEST(ExtractCauchy, GreenIdentityWithPlaneWave) {
  const double k = 2.0;
  const auto S = single(1.0, Vec3(-0.45, 0.1, 0.05));
  const Medium q({Bump{0.4, Vec3(0.25, -0.1, 0.0), 0.55}});
  const FieldSolution sol = solve_forward(S, q, k, options(32));
  const MeasurementSphere sph(kOmega, 24, 48);
  const CauchyData d = extract_cauchy(sol, sph);
  const CVec3 xi = k * Vec3(0.6, 0.0, 0.8).cast<cplx>();
  auto v = [&](const Vec3& x) { return std::exp(kI * bilinear_dot(x.cast<cplx>(), xi)); };
  cplx boundary = 0.0;
  for (std::size_t i = 0; i < sph.size(); ++i) {
    const Vec3& x = sph.points()[i];
    const cplx dnv = kI * bilinear_dot(xi, sph.normals()[i].cast<cplx>()) * v(x);
    boundary += sph.weights()[i] * (d.dnu[i] * v(x) - d.u[i] * dnv);
  }
  cplx volume = 0.0;
  for (std::size_t p : sol.support) volume += sol.density[p] * v(sol.lattice.node(p));
  volume *= k * k * sol.lattice.cell_volume();
  const cplx expected = v(S.sources[0].location) - volume;
  EXPECT_LE(std::abs(boundary - expected), 1e-4 * std::abs(expected));
}

TEST(ExtractCauchy, RejectsSphereNearSourcesOrMedium) {
  const FieldSolution sol = solve_forward(single(1.0, Vec3(0.8, 0, 0)), Medium(), 1.0, options(16));
  EXPECT_THROW(extract_cauchy(sol, MeasurementSphere(0.85, 8, 16)), DomainError);
}

TEST(ExtractCauchy, RefinementChangesDataByLessThanOnePercent) {
  const auto S = single(1.0, Vec3(-0.45, 0.1, 0.05));
  const Medium q({Bump{0.4, Vec3(0.25, -0.1, 0.0), 0.55}});
  const MeasurementSphere sph(kOmega, 12, 24);
  const CauchyData c = extract_cauchy(solve_forward(S, q, 2.0, options(32)), sph);
  const CauchyData f = extract_cauchy(solve_forward(S, q, 2.0, options(64)), sph);
  const int L = default_lmax(sph);
  EXPECT_LE(cauchy_misfit(c - f, L), 0.01 * cauchy_misfit(f, L));
}

TEST(BoundaryNorms, SphericalHarmonicsAreOrthonormal) {
  const MeasurementSphere sph(1.0, 12, 24);
  const int L = default_lmax(sph);
  EXPECT_EQ(L, 11);
  for (int l = 0; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) {
      std::vector<cplx> y(sph.size());
      for (std::size_t i = 0; i < sph.size(); ++i) y[i] = real_sph_harmonic(l, m, sph.theta(i), sph.phi(i));
      const auto c = sph_coefficients(y, sph, L);
      for (std::size_t h = 0; h < c.size(); ++h)
        EXPECT_NEAR(std::abs(c[h]), h == static_cast<std::size_t>(l * l + l + m) ? 1.0 : 0.0, 1e-12);
      EXPECT_NEAR(boundary_h1_norm(y, sph, L), std::sqrt(1.0 + l * (l + 1.0)), 1e-12);
    }
}

TEST(PerturbCauchy, NormIsExactAndDeterministic) {
  const FieldSolution sol = solve_forward(single(1.0, Vec3(0.1, 0, 0)), Medium(), 1.0, options(16));
  const MeasurementSphere sph(kOmega, 12, 24);
  const CauchyData d = extract_cauchy(sol, sph);
  const int L = default_lmax(sph);
  const CauchyData same = perturb_cauchy(d, 0.0, 1);
  EXPECT_EQ(same.u, d.u);
  for (double eps : {1e-5, 1e-2}) {
    const CauchyData p = perturb_cauchy(d, eps, 42);
    EXPECT_NEAR(cauchy_misfit(p - d, L), eps, 1e-10 * eps);
    EXPECT_EQ(perturb_cauchy(d, eps, 42).u, p.u);
    EXPECT_NE(perturb_cauchy(d, eps, 43).u, p.u);
  }
  const CauchyData coarse = extract_cauchy(sol, MeasurementSphere(kOmega, 6, 12));
  EXPECT_THROW(perturb_cauchy(coarse, 1e-3, 1), DomainError);
}

TEST(StabilityProbe, IdenticalSystemsGiveZero) {
  const auto S = single(1.0, Vec3(-0.4, 0.1, 0.0));
  const Medium q({Bump{0.3, Vec3(0.3, 0, 0), 0.5}});
  const ForwardStabilityReport r = forward_stability_probe(S, S, q, q, 2.0, 0.1, options(16));
  EXPECT_EQ(r.field_difference, 0.0);
}

TEST(StabilityProbe, SourceOnlyDifferenceHasFiniteRatio) {
  const Medium q({Bump{0.3, Vec3(0.3, 0, 0), 0.5}});
  const ForwardStabilityReport r = forward_stability_probe(single(1.0, Vec3(-0.4, 0.1, 0.0)), single(1.2, Vec3(-0.4, 0.15, 0.0)),
                                                           q, q, 2.0, 0.1, options(24));
  EXPECT_GT(r.source_term, 0.0);
  EXPECT_TRUE(std::isfinite(r.ratio));
  EXPECT_GT(r.ratio, 0.0);
}
