#include <gtest/gtest.h>

#include <cmath>

#include "hsl/faddeev.hpp"
#include "hsl/rng.hpp"

using namespace hsl;

namespace {

SpectralField random_field(const CubeGrid& g, std::uint64_t seed) {
  CounterRng rng(seed);
  SpectralField F(g);
  for (auto& c : F.coeffs) c = cplx(rng.normal(), rng.normal());
  return F;
}

double rel_diff(const SpectralField& a, const SpectralField& b) {
  return sobolev_norm(a - b, 0) / sobolev_norm(b, 0);
}

}  // namespace

TEST(Denominator, LowestModeArithmetic) {
  const FaddeevParameter xi(0.7, 2.5);
  const cplx d = denominator(FrequencyIndex{0, 0, 0}, kPi, xi);
  EXPECT_NEAR(d.real(), 0.25, 1e-15);
  EXPECT_NEAR(d.imag(), 2.5, 1e-15);
}

TEST(Denominator, SecondComponentFlipConjugatesImaginaryPart) {
  const FaddeevParameter xi(1.3, 0.8);
  const FrequencyIndex m{2, 3, -1}, flipped{2, -4, -1};  // alpha_2 -> -alpha_2
  EXPECT_NEAR(denominator(m, kPi, xi).imag(), -denominator(flipped, kPi, xi).imag(), 1e-12);
  EXPECT_NEAR(denominator(m, kPi, xi).real(), denominator(flipped, kPi, xi).real(), 1e-12);
}

TEST(Denominator, MinimumImaginaryPartOverGrid) {
  const CubeGrid g(kPi, 32);
  for (double t : {0.5, 3.0}) {
    const FaddeevParameter xi(1.0, t);
    double mn = INFINITY;
    for (std::size_t p = 0; p < g.size(); ++p) mn = std::min(mn, std::abs(denominator(g.frequency(p), xi).imag()));
    EXPECT_NEAR(mn, t * kPi / g.R0(), 1e-12);
  }
}

TEST(ApplyG, SingleModeIsDiagonal) {
  const CubeGrid g(2.0, 16);
  const FaddeevParameter xi(0.5, 1.5);
  SpectralField F(g);
  const FrequencyIndex m{1, -2, 3};
  F.at(m) = 1.0;
  const SpectralField G = apply_G(F, xi);
  EXPECT_NEAR(std::abs(G.at(m) + 1.0 / denominator(m, g.R0(), xi)), 0.0, 1e-15);
  double others = 0.0;
  for (const auto& c : G.coeffs) others += std::abs(c);
  EXPECT_NEAR(others, std::abs(G.at(m)), 1e-15);
}

TEST(ApplyG, ExactInverseAndBoundsOnRandomFields) {
  const CubeGrid g(kPi, 16);
  for (double s : {0.0, 1.0, 10.0})
    for (double t : {0.5, 1.0, 5.0, 20.0}) {
      const FaddeevParameter xi(s, t);
      for (int trial = 0; trial < 4; ++trial) {
        const SpectralField f = random_field(g, 100 * trial + static_cast<std::uint64_t>(s * 7 + t * 3));
        EXPECT_LE(rel_diff(apply_faddeev_operator(apply_G(f, xi), xi), f), 1e-12);
        EXPECT_TRUE(l2_bound_check(f, xi).holds());
        EXPECT_TRUE(gradient_bound_check(f, xi).holds());
      }
    }
}

TEST(ApplyG, ActsOnFieldsLikeThePdeOperator) {
  // (Delta + 2 i xi.grad) via spectral derivatives, independent of the symbol formula.
  const CubeGrid g(1.5, 16);
  const FaddeevParameter xi(0.8, 2.0);
  const SpectralField f = random_field(g, 5);
  const SpectralField u = apply_G(f, xi);
  const SpectralField Lu =
      spectral_laplacian(u) + cplx(0, 2.0 * xi.s) * spectral_derivative(u, 0) + cplx(-2.0 * xi.t, 0) * spectral_derivative(u, 1);
  EXPECT_LE(rel_diff(Lu, f), 1e-12);
}

TEST(ApplyG, Linear) {
  const CubeGrid g(kPi, 16);
  const FaddeevParameter xi(1.0, 1.0);
  const SpectralField f = random_field(g, 1), h = random_field(g, 2);
  const cplx a(0.3, -1.2), b(2.0, 0.5);
  const SpectralField lhs = apply_G(a * f + b * h, xi);
  const SpectralField rhs = a * apply_G(f, xi) + b * apply_G(h, xi);
  EXPECT_LE(rel_diff(lhs, rhs), 1e-14);
}

TEST(Bounds, ZeroFieldAndSingleModeGradient) {
  const CubeGrid g(kPi, 16);
  const FaddeevParameter xi(2.0, 1.0);
  const SpectralField zero(g);
  EXPECT_EQ(gradient_bound_check(zero, xi).lhs, 0.0);
  EXPECT_EQ(gradient_bound_check(zero, xi).rhs, 0.0);

  SpectralField F(g);
  const FrequencyIndex m{3, 1, -2};
  F.at(m) = cplx(0.6, 0.8);
  const Vec3 alpha = m.alpha(g.R0());
  const double amp = 1.0 / std::abs(denominator(m, g.R0(), xi));
  const double expected = (std::abs(alpha(0)) + std::abs(alpha(1)) + std::abs(alpha(2))) * amp;
  const BoundCheck c = gradient_bound_check(F, xi);
  EXPECT_NEAR(c.lhs, expected, 1e-13);
  EXPECT_NEAR(c.rhs, (g.R0() / kPi) * (2.0 + std::sqrt(4.0 + kPi / g.R0())), 1e-13);
  EXPECT_TRUE(c.holds());
}

TEST(FaddeevParameter, RejectsInvalidInput) {
  EXPECT_THROW(FaddeevParameter(0.0, 0.0), DomainError);
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 0.1;
  EXPECT_THROW(FaddeevParameter(0.0, 1.0, bad), DomainError);
}
