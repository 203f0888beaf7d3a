#include <gtest/gtest.h>

#include <sstream>

#include "hsl/field_io.hpp"
#include "hsl/grid.hpp"
#include "hsl/rng.hpp"

using namespace hsl;

namespace {

SpectralField random_spectral(const CubeGrid& g, std::uint64_t seed) {
  CounterRng rng(seed);
  SpectralField F(g);
  for (auto& c : F.coeffs) c = cplx(rng.normal(), rng.normal());
  return F;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Independent oracle: sum over all (m1, m2, m3) of F e_alpha(x), no separation of axes.
cplx brute_force_eval(const SpectralField& F, const Vec3& x) {
  const CubeGrid& g = F.grid;
  const int n = g.n();
  cplx sum = 0.0;
  for (int m1 = -n / 2; m1 < n / 2; ++m1)
    for (int m2 = -n / 2; m2 < n / 2; ++m2)
      for (int m3 = -n / 2; m3 < n / 2; ++m3) {
        const FrequencyIndex m{m1, m2, m3};
        sum += F.at(m) * std::exp(kI * m.alpha(g.R0()).dot(x));
      }
  return sum / std::pow(2.0 * g.R0(), 1.5);
}

}  // namespace

TEST(CubeGrid, RejectsBadSizes) {
  EXPECT_THROW(CubeGrid(1.0, 6), DomainError);
  EXPECT_THROW(CubeGrid(1.0, 15), DomainError);
  EXPECT_THROW(CubeGrid(-1.0, 16), DomainError);
  EXPECT_NO_THROW(CubeGrid(1.0, 16));
}

TEST(Transforms, LowestShiftedModeHasUnitCoefficient) {
  const CubeGrid g(kPi, 16);
  const Vec3 alpha = FrequencyIndex{0, 0, 0}.alpha(g.R0());
  const auto f = ScalarField::sample(
      g, [&](const Vec3& x) { return std::exp(kI * alpha.dot(x)) / std::pow(2.0 * g.R0(), 1.5); });
  const SpectralField F = to_spectral(f);
  for (std::size_t p = 0; p < F.coeffs.size(); ++p) {
    const cplx expect = p == 0 ? cplx(1.0) : cplx(0.0);
    EXPECT_NEAR(std::abs(F.coeffs[p] - expect), 0.0, 1e-13);
  }
}

TEST(Transforms, ZeroMapsToZero) {
  const CubeGrid g(2.0, 8);
  const SpectralField F = to_spectral(ScalarField(g));
  for (const auto& c : F.coeffs) EXPECT_EQ(c, cplx(0.0));
}

TEST(Transforms, SingleModeSamples) {
  const CubeGrid g(1.5, 16);
  SpectralField F(g);
  F.at({1, 0, 0}) = 1.0;
  const ScalarField f = from_spectral(F);
  for (std::size_t p = 0; p < g.size(); p += 37) {
    const Vec3 x = g.node(p);
    const cplx expect = std::exp(kI * (kPi / g.R0()) * (x(0) + 0.5 * x(1))) / std::pow(2.0 * g.R0(), 1.5);
    EXPECT_NEAR(std::abs(f.values[p] - expect), 0.0, 1e-13);
  }
}

TEST(Transforms, RoundTripAndParseval) {
  for (int n : {16, 32}) {
    const CubeGrid g(kPi, n);
    CounterRng rng(7, n);
    ScalarField f(g);
    for (auto& v : f.values) v = cplx(rng.normal(), rng.normal());
    const SpectralField F = to_spectral(f);
    const ScalarField back = from_spectral(F);
    double norm = 0.0;
    for (const auto& v : f.values) norm = std::max(norm, std::abs(v));
    EXPECT_LE(max_abs_diff(back.values, f.values) / norm, 1e-13);

    double s_spec = 0.0, s_val = 0.0;
    for (const auto& c : F.coeffs) s_spec += std::norm(c);
    for (const auto& v : f.values) s_val += std::norm(v);
    EXPECT_NEAR(s_spec / (g.cell_volume() * s_val), 1.0, 1e-12);

    const SpectralField G = random_spectral(g, 11);
    const SpectralField G2 = to_spectral(from_spectral(G));
    EXPECT_LE(max_abs_diff(G2.coeffs, G.coeffs), 1e-13 * sobolev_norm(G, 0));
  }
}

TEST(EvalAt, MatchesBruteForceAndNodes) {
  const CubeGrid g(kPi, 8);
  const SpectralField F = random_spectral(g, 3);
  CounterRng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Vec3 x(rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi));
    EXPECT_NEAR(std::abs(eval_at(F, x) - brute_force_eval(F, x)), 0.0, 1e-12);
  }
  const ScalarField f = from_spectral(F);
  for (std::size_t p = 0; p < g.size(); p += 13)
    EXPECT_NEAR(std::abs(eval_at(F, g.node(p)) - f.values[p]), 0.0, 1e-12);
}

TEST(EvalAt, BandLimitedMidpointMatchesClosedForm) {
  const CubeGrid g(2.0, 16);
  auto fs = [&](const Vec3& x) {
    return std::cos(kPi * x(0) / g.R0()) * std::exp(kI * 1.5 * kPi * x(1) / g.R0());
  };
  const SpectralField F = project(g, fs);
  const Vec3 mid = g.node(3, 4, 5) + Vec3::Constant(0.5 * g.spacing());
  EXPECT_NEAR(std::abs(eval_at(F, mid) - fs(mid)), 0.0, 1e-12);
}

TEST(EvalAt, OutsideCubeThrows) {
  const CubeGrid g(1.0, 8);
  SpectralField F(g);
  EXPECT_THROW(eval_at(F, Vec3(1.1, 0.0, 0.0)), DomainError);
  EXPECT_NO_THROW(eval_at(F, Vec3(1.0, -1.0, 1.0)));
}

TEST(Derivatives, EigenfunctionsAndLaplacianIdentity) {
  const CubeGrid g(kPi, 16);
  SpectralField F(g);
  F.at({1, 0, 0}) = 1.0;
  const SpectralField d1 = spectral_derivative(F, 0);
  EXPECT_NEAR(std::abs(d1.at({1, 0, 0}) - kI * (kPi / g.R0())), 0.0, 1e-15);
  const SpectralField d2 = spectral_derivative(F, 1);
  EXPECT_NEAR(std::abs(d2.at({1, 0, 0}) - kI * 0.5 * (kPi / g.R0())), 0.0, 1e-15);

  const SpectralField R = random_spectral(g, 9);
  SpectralField twice = spectral_derivative(spectral_derivative(R, 0), 0);
  twice = twice + spectral_derivative(spectral_derivative(R, 1), 1);
  twice = twice + spectral_derivative(spectral_derivative(R, 2), 2);
  const SpectralField lap = spectral_laplacian(R);
  EXPECT_LE(max_abs_diff(twice.coeffs, lap.coeffs), 1e-12 * sobolev_norm(lap, 0));
}

TEST(Sobolev, DefinitionAndIdentity) {
  const CubeGrid g(2.0, 16);
  EXPECT_EQ(sobolev_norm(SpectralField(g), 2), 0.0);
  SpectralField F(g);
  const FrequencyIndex m{2, -3, 1};
  F.at(m) = 1.0;
  for (int s = 0; s <= 3; ++s)
    EXPECT_NEAR(sobolev_norm(F, s), std::pow(1.0 + m.alpha(g.R0()).squaredNorm(), 0.5 * s), 1e-10);

  const SpectralField R = random_spectral(g, 21);
  double grad2 = 0.0;
  for (int a = 0; a < 3; ++a) grad2 += std::pow(sobolev_norm(spectral_derivative(R, a), 0), 2);
  const double h0 = sobolev_norm(R, 0), h1 = sobolev_norm(R, 1), h2 = sobolev_norm(R, 2);
  EXPECT_NEAR((h0 * h0 + grad2) / (h1 * h1), 1.0, 1e-12);
  EXPECT_LE(h0, h1);
  EXPECT_LE(h1, h2);
  EXPECT_THROW(sobolev_norm(R, 4), DomainError);
}

TEST(Resample, MatchesEvalAtOnFineNodes) {
  const CubeGrid g(kPi, 8);
  const SpectralField F = random_spectral(g, 4);
  const ScalarField fine = resample(F, 16);
  for (std::size_t p = 0; p < fine.values.size(); p += 97)
    EXPECT_NEAR(std::abs(fine.values[p] - eval_at(F, fine.grid.node(p))), 0.0, 1e-11);
}

TEST(FieldIo, RoundTrip) {
  const CubeGrid g(1.25, 8);
  const SpectralField F = random_spectral(g, 8);
  std::stringstream ss;
  write_field(ss, F);
  const AnyField back = read_field(ss);
  ASSERT_TRUE(std::holds_alternative<SpectralField>(back));
  const auto& G = std::get<SpectralField>(back);
  EXPECT_EQ(G.grid, g);
  EXPECT_EQ(G.coeffs, F.coeffs);

  const ScalarField f = from_spectral(F);
  std::stringstream s2;
  write_field(s2, f);
  const AnyField b2 = read_field(s2);
  ASSERT_TRUE(std::holds_alternative<ScalarField>(b2));
  EXPECT_EQ(std::get<ScalarField>(b2).values, f.values);

  std::stringstream bad("{\"R0\": 1.0}\n");
  EXPECT_THROW(read_field(bad), ConfigError);
}
