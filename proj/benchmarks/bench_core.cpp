#include "oslsim/generators.hpp"
#include "oslsim/matexp.hpp"
#include "oslsim/polar.hpp"
#include "oslsim/simulator.hpp"
#include "oslsim/symbol.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace osl;

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void BM_MatPow(benchmark::State& state) {
  Rng rng(1);
  const SymMatrix e = gen::random_sym(rng, static_cast<int>(state.range(0)), 0.55, 3.0);
  double r = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mat_pow(e, r));
    r = r < 1e5 ? r * 1.7 : 0.37;
  }
}
BENCHMARK(BM_MatPow)->DenseRange(2, 5);

void BM_PolarDecompose(benchmark::State& state) {
  Rng rng(2);
  const int d = static_cast<int>(state.range(0));
  const SymMatrix e = gen::random_sym(rng, d, 0.6, 3.0);
  const Vector xi = gen::random_unit(rng, d) * 123.0;
  for (auto _ : state) benchmark::DoNotOptimize(polar_decompose(e, xi));
}
BENCHMARK(BM_PolarDecompose)->DenseRange(2, 5);

// Uniform circle: adaptive angular rule over per-direction radial integrals.
void BM_SymbolStableLike(benchmark::State& state) {
  const OslModel m(make_stable_like(2, sin_alpha(1.2, 0.3)), SpectralMeasure::uniform(2, 1.0));
  const Vector x = v2(0.4, -0.2), xi = v2(1.3, -2.1);
  for (auto _ : state) benchmark::DoNotOptimize(symbol_symmetric(m, x, xi));
}
BENCHMARK(BM_SymbolStableLike)->Unit(benchmark::kMillisecond);

// Four atoms with a non-diagonal exponent: stationary-phase windows in the tail.
void BM_SymbolInterpolatedAtoms(benchmark::State& state) {
  Matrix high(2, 2);
  high << 1.0, 0.25, 0.25, 1.0;
  const OslModel m(
      make_interpolated(SymMatrix::scaled_identity(2, 1.25), SymMatrix(high), sin_blend(0, 1.0)),
      SpectralMeasure::discrete({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, {1, 1, 0.5, 0.5}));
  const Vector x = v2(0.3, 0.1), xi = v2(4.0, -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(symbol_symmetric(m, x, xi));
}
BENCHMARK(BM_SymbolInterpolatedAtoms)->Unit(benchmark::kMicrosecond);

// Uniform sphere in three dimensions reduces to a single radial integral.
void BM_SymbolUniformSphere(benchmark::State& state) {
  Rng rng(3);
  const OslModel m(make_constant(gen::random_sym(rng, 3, 0.6, 2.0)),
                   SpectralMeasure::uniform(3, 2.0));
  Vector xi(3);
  xi << 1.3, -0.7, 1.6;
  for (auto _ : state) benchmark::DoNotOptimize(symbol_symmetric(m, Vector::Zero(3), xi));
}
BENCHMARK(BM_SymbolUniformSphere)->Unit(benchmark::kMicrosecond);

void BM_SimulatePath(benchmark::State& state) {
  const OslModel m(make_constant(SymMatrix::identity(1)),
                   SpectralMeasure::discrete({Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)},
                                             {0.5, 0.5}));
  SimConfig config;
  config.horizon = 0.5;
  config.eps = 1.0 / static_cast<double>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_indexed_path(m, Vector::Zero(1), config, i++));
  }
}
BENCHMARK(BM_SimulatePath)->RangeMultiplier(10)->Range(100, 10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
