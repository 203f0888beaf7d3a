#include <gtest/gtest.h>

#include <cmath>

#include "hsl/medium.hpp"
#include "hsl/rng.hpp"
#include "hsl/sources.hpp"

using namespace hsl;

namespace {

PointSourceSet single(double a, const Vec3& z, double eta = 0.05) {
  PointSourceSet S;
  S.sources = {{a, z}};
  S.eta = eta;
  return S;
}

// Central-difference Laplacian, Richardson-extrapolated from steps h and h/2.
cplx fd_laplacian(const std::function<cplx(const Vec3&)>& f, const Vec3& x, double h) {
  auto lap = [&](double s) {
    cplx v = -6.0 * f(x);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e(a) = s;
      v += f(x + e) + f(x - e);
    }
    return v / (s * s);
  };
  return (4.0 * lap(h / 2) - lap(h)) / 3.0;
}

}  // namespace

TEST(Admissibility, SlackSingleSourceIsAdmissible) {
  EXPECT_TRUE(check_admissible(single(1.0, Vec3::Zero()), 1.0).admissible);
}

TEST(Admissibility, SeparationExactlyEightEtaIsRejected) {
  PointSourceSet S;
  S.eta = 0.05;
  S.sources = {{1.0, Vec3(-0.2, 0, 0)}, {1.0, Vec3(0.2, 0, 0)}};
  const auto rep = check_admissible(S, 1.0);
  EXPECT_FALSE(rep.admissible);
  EXPECT_FALSE(rep.violations.empty());
}

TEST(Admissibility, BoundaryDistanceFourEtaIsRejected) {
  EXPECT_FALSE(check_admissible(single(1.0, Vec3(0.8, 0, 0)), 1.0).admissible);
}

TEST(Admissibility, AmplitudeCapAndCountAreStrict) {
  EXPECT_FALSE(check_admissible(single(2.0, Vec3::Zero()), 1.0).admissible);
  EXPECT_FALSE(check_admissible(single(-0.1, Vec3::Zero()), 1.0).admissible);
  PointSourceSet S;
  S.N0 = 1;
  S.sources = {{1.0, Vec3(-0.3, 0, 0)}, {1.0, Vec3(0.3, 0, 0)}};
  EXPECT_FALSE(check_admissible(S, 1.0).admissible);
}

TEST(Admissibility, MonotoneInEta) {
  CounterRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    PointSourceSet S;
    S.eta = rng.uniform(0.01, 0.08);
    for (int i = 0; i < 3; ++i)
      S.sources.push_back({rng.uniform(0.0, 2.0), Vec3(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))});
    if (!check_admissible(S, 1.0)) continue;
    PointSourceSet T = S;
    T.eta *= rng.uniform(0.1, 1.0);
    EXPECT_TRUE(check_admissible(T, 1.0).admissible);
  }
}

TEST(GreenFunction, StaticAndPhaseValues) {
  EXPECT_NEAR(std::abs(green_free(Vec3(1, 0, 0), Vec3::Zero(), 0.0) - 1.0 / (4 * kPi)), 0.0, 1e-15);
  const cplx v = green_free(Vec3(kPi, 0, 0), Vec3::Zero(), 1.0);
  EXPECT_NEAR(v.real(), -1.0 / (4 * kPi * kPi), 1e-15);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  EXPECT_THROW(green_free(Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3), 1.0), SingularityError);
}

TEST(GreenFunction, HelmholtzResidualByFiniteDifferences) {
  CounterRng rng(3);
  const double k = 1.7, h = 1e-3;
  const Vec3 z(0.1, -0.2, 0.05);
  for (int i = 0; i < 10; ++i) {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    const Vec3 x = z + d.normalized() * rng.uniform(0.5, 2.0);
    const auto f = [&](const Vec3& y) { return green_free(y, z, k); };
    const cplx res = fd_laplacian(f, x, h) + k * k * f(x);
    EXPECT_LE(std::abs(res), 1e-6 * std::abs(f(x)));
  }
}

TEST(GreenFunction, GradientAndHessianMatchFiniteDifferences) {
  const double k = 2.3, h = 1e-5;
  const Vec3 z(0.3, 0.1, -0.4), x(-0.2, 0.5, 0.3);
  const CVec3 g = green_gradient(x, z, k);
  const Eigen::Matrix3cd H = green_hessian(x, z, k);
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e(a) = h;
    const cplx fd = (green_free(x + e, z, k) - green_free(x - e, z, k)) / (2 * h);
    EXPECT_NEAR(std::abs(fd - g(a)), 0.0, 1e-7);
    const CVec3 gd = (green_gradient(x + e, z, k) - green_gradient(x - e, z, k)) / (2 * h);
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(std::abs(gd(b) - H(b, a)), 0.0, 1e-6);
  }
}

TEST(SingularPart, EmptySingleAndLinear) {
  PointSourceSet empty;
  EXPECT_EQ(eval_u0(empty, 1.0, Vec3(0.1, 0, 0)), cplx(0.0));
  EXPECT_NEAR(std::abs(eval_u0(single(1.0, Vec3::Zero()), 0.0, Vec3(0, 1, 0)) + 1.0 / (4 * kPi)), 0.0, 1e-15);

  PointSourceSet S;
  S.sources = {{0.7, Vec3(0.1, 0, 0)}, {1.3, Vec3(-0.2, 0.3, 0)}};
  const Vec3 x(0.4, -0.1, 0.2);
  const double k = 1.4;
  const cplx sum = -0.7 * green_free(x, S.sources[0].location, k) - 1.3 * green_free(x, S.sources[1].location, k);
  EXPECT_NEAR(std::abs(eval_u0(S, k, x) - sum), 0.0, 1e-15);
  EXPECT_THROW(eval_u0(S, k, S.sources[1].location), SingularityError);
}

TEST(BallQuadrature, GreenNormMatchesClosedFormAtCentre) {
  // ||Phi(., 0)||^2 over B_rho is rho / (4 pi).
  for (double rho : {0.5, 1.0, 1.4})
    EXPECT_NEAR(green_l2_norm(Vec3::Zero(), rho), std::sqrt(rho / (4 * kPi)), 1e-10);
}

TEST(BallQuadrature, OffCentreGreenNormConverges) {
  const Vec3 z(0.35, -0.2, 0.4);
  const double coarse = green_l2_norm(z, 1.0, {8, 12, 24});
  const double fine = green_l2_norm(z, 1.0, {24, 36, 72});
  EXPECT_NEAR(coarse / fine, 1.0, 0.02);
  EXPECT_LT(fine, std::sqrt(1.0 / (4 * kPi)));  // the centre maximizes the norm
}

TEST(BallQuadrature, IntegratesPolynomialsAroundSingularPoints) {
  // int_{B_1} |x|^2 = 4 pi / 5, independent of the partition.
  const double v = integrate_ball([](const Vec3& x) { return x.squaredNorm(); }, 1.0,
                                  {Vec3(0.3, 0, 0), Vec3(-0.1, 0.4, 0.2)});
  EXPECT_NEAR(v, 4 * kPi / 5, 1e-10);
}

TEST(U0Difference, IdenticalSetsGiveZero) {
  const auto S = single(1.0, Vec3(0.1, 0.2, 0));
  const auto a = u0_difference_bound(S, S, {0}, 0.3, 1.0, kPi, 1.0);
  EXPECT_NEAR(a.lhs, 0.0, 1e-14);
  EXPECT_NEAR(a.rhs, 0.0, 1e-14);
}

TEST(U0Difference, AmplitudeOnlyCase) {
  const Vec3 z(0.2, -0.1, 0.3);
  const auto a = u0_difference_bound(single(1.0, z), single(1.1, z), {0}, 0.3, 1.2, kPi, 1.0);
  EXPECT_NEAR(a.lhs, 0.1 * green_l2_norm(z, 1.0), 1e-9);
  EXPECT_GE(a.m1 + 1e-12, green_l2_norm(z, 1.0));
  EXPECT_TRUE(a.holds());
}

TEST(U0Difference, SmallShiftHoldsAndConverges) {
  const Vec3 z(0.1, 0.0, -0.2);
  const auto S1 = single(1.0, z), S2 = single(1.0, z + Vec3(1e-2, 0, 0));
  const auto coarse = u0_difference_bound(S1, S2, {0}, 0.3, 1.0, kPi, 1.0, {12, 16, 32});
  const auto fine = u0_difference_bound(S1, S2, {0}, 0.3, 1.0, kPi, 1.0, {24, 32, 64});
  EXPECT_TRUE(fine.holds());
  EXPECT_NEAR(coarse.lhs / fine.lhs, 1.0, 0.01);
  EXPECT_THROW(u0_difference_bound(S1, S2, {0}, 0.6, 1.0, kPi, 1.0), DomainError);
}

TEST(Sphere, WeightsAndPolynomialMoments) {
  const MeasurementSphere s(1.3, 12, 24);
  double area = 0.0, x2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_GT(s.weights()[i], 0.0);
    area += s.weights()[i];
    x2 += s.weights()[i] * s.points()[i](0) * s.points()[i](0);
    EXPECT_NEAR((s.normals()[i] * s.radius() - s.points()[i]).norm(), 0.0, 1e-14);
  }
  EXPECT_NEAR(area, s.area(), 1e-12);
  EXPECT_NEAR(x2, 4 * kPi * std::pow(1.3, 4) / 3, 1e-12);
}

TEST(Medium, BumpPeakSupportAndDerivatives) {
  const Medium q({Bump{0.4, Vec3(0.1, 0.2, -0.1), 0.6}});
  EXPECT_NEAR(q.value(Vec3(0.1, 0.2, -0.1)), 0.4, 1e-15);
  EXPECT_EQ(q.value(Vec3(0.1, 0.8, -0.1)), 0.0);
  EXPECT_NEAR(q.support_radius(), std::sqrt(0.06) + 0.6, 1e-12);
  const Vec3 x(0.3, 0.1, 0.05);
  const double h = 1e-5;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e(a) = h;
    EXPECT_NEAR((q.value(x + e) - q.value(x - e)) / (2 * h), q.gradient(x)(a), 1e-8);
    const Vec3 gd = (q.gradient(x + e) - q.gradient(x - e)) / (2 * h);
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(gd(b), q.hessian(x)(b, a), 1e-7);
  }
}

TEST(Medium, NormsAreSampledSupremaWithSafetyFactor) {
  const Medium q({Bump{0.4, Vec3::Zero(), 0.6}});
  const MediumNorms& n = q.norms();
  EXPECT_NEAR(n.c0, 0.4, 1e-15);
  EXPECT_GT(n.grad_c0, 0.0);
  EXPECT_NEAR(n.c2, Medium::kC2SafetyFactor * n.c2_sampled, 1e-15);
  EXPECT_GT(n.c2_sampled, n.c0 + n.grad_c0);
  EXPECT_TRUE(Medium().is_zero());
  EXPECT_EQ(Medium().norms().c2, 0.0);
  EXPECT_NEAR(q.scaled(2.0).norms().c2_sampled, 2.0 * n.c2_sampled, 1e-12);
}
