#include <benchmark/benchmark.h>

#include "hsl/analysis.hpp"
#include "hsl/faddeev.hpp"
#include "hsl/rng.hpp"

using namespace hsl;

namespace {

constexpr double kOmega = 0.95;

PointSourceSet one_source() {
  PointSourceSet S;
  S.eta = 0.04;
  S.sources = {{0.8, Vec3(-0.35, 0.1, 0.05)}};
  return S;
}

Medium bump() { return Medium({Bump{0.3, Vec3(0.3, 0, 0), 0.55}}); }

CauchyData bump_data() {
  ForwardOptions fo;
  fo.omega_radius = kOmega;
  return extract_cauchy(solve_forward(one_source(), bump(), 2.0, fo), MeasurementSphere(kOmega, 24, 48));
}

}  // namespace

static void BM_FaddeevInverse(benchmark::State& state) {
  const CubeGrid g(kPi, static_cast<int>(state.range(0)));
  CounterRng rng(3);
  SpectralField f(g);
  for (auto& c : f.coeffs) c = cplx(rng.normal(), rng.normal());
  const FaddeevParameter xi(1.0, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(apply_G(f, xi));
}
BENCHMARK(BM_FaddeevInverse)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);

static void BM_BuildCgo(benchmark::State& state) {
  const CubeGrid g(kPi, static_cast<int>(state.range(0)));
  const Mat3 T = triad_from(Vec3(0.3, -0.5, 0.8).normalized());
  const CgoParameter xi(T.col(0), T.col(1), T.col(2), 20.0, 0.0, 1.0);
  const Medium q = Medium({Bump{0.5, Vec3(0.3, -0.2, 0.1), 1.2}}).scaled(2e-3);
  for (auto _ : state) benchmark::DoNotOptimize(build_cgo(q, xi, g));
}
BENCHMARK(BM_BuildCgo)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ForwardSolve(benchmark::State& state) {
  ForwardOptions fo;
  fo.omega_radius = kOmega;
  fo.n = static_cast<int>(state.range(0));
  const PointSourceSet S = one_source();
  const Medium q = bump();
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(S, q, 2.0, fo));
}
BENCHMARK(BM_ForwardSolve)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_BoundaryPairing(benchmark::State& state) {
  PointSourceSet S = one_source();
  ForwardOptions fo;
  fo.omega_radius = kOmega;
  const int nt = static_cast<int>(state.range(0));
  const CauchyData d = extract_cauchy(solve_forward(S, Medium(), 2.0, fo), MeasurementSphere(kOmega, nt, 2 * nt));
  const TestSolution v = TestSolution::plane_wave(plane_wave_parameter(Vec3(0, 0, 1), 2.0));
  for (auto _ : state) benchmark::DoNotOptimize(boundary_pairing(d, v));
  state.SetItemsProcessed(state.iterations() * nt * 2 * nt);
}
BENCHMARK(BM_BoundaryPairing)->Arg(24)->Arg(48);

static void BM_Imaging(benchmark::State& state) {
  const CauchyData d = bump_data();
  SearchGrid grid;
  grid.half_width = grid.ball_radius = kOmega;
  for (auto _ : state) benchmark::DoNotOptimize(imaging_functional(d, 2.0, grid, 0));
}
BENCHMARK(BM_Imaging)->Unit(benchmark::kMillisecond);

static void BM_SingleSourceFit(benchmark::State& state) {
  const CauchyData d = bump_data();
  RecoveryOptions ro;
  ro.max_radius = kOmega;
  const PairedFamily fam = pair_family(d, bump(), 2.0, ro);
  for (auto _ : state) benchmark::DoNotOptimize(fit_single_source(fam, Vec3(-0.3, 0.1, 0.0), ro));
}
BENCHMARK(BM_SingleSourceFit)->Unit(benchmark::kMillisecond);

static void BM_CutoffMeasure(benchmark::State& state) {
  const ProductCutoff chi({Vec3(-0.3, 0, 0), Vec3(0.3, 0, 0)}, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(measure_cutoff(chi, 0.6, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_CutoffMeasure)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
