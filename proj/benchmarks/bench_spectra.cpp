#include <benchmark/benchmark.h>

#include "latticegap/finite_oracle.hpp"
#include "latticegap/guided.hpp"
#include "latticegap/localized.hpp"
#include "latticegap/propagative.hpp"

using namespace latticegap;

static void BM_DispersionTable(benchmark::State& state) {
  const auto s = uniform_square(static_cast<int>(state.range(0)), 1, 1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dispersion_table(s, 65, 65));
}
BENCHMARK(BM_DispersionTable)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_AveragedResolvent(benchmark::State& state) {
  const auto s = uniform_square(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(averaged_resolvent_k2(s, 3.5, 0.7));
}
BENCHMARK(BM_AveragedResolvent);

static void BM_GuidedSpectrum(benchmark::State& state) {
  const auto s = uniform_square(1, 1, 1.0, -0.9);
  for (auto _ : state) benchmark::DoNotOptimize(guided_spectrum(s, 1.0));
}
BENCHMARK(BM_GuidedSpectrum)->Unit(benchmark::kMillisecond);

static void BM_DLoc(benchmark::State& state) {
  const auto s = uniform_square(1, 1, 1.0, -0.9, 0.1);
  const auto gs = uniform_gap_structure(-0.9, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(d_loc(s, 4.0, gs));
}
BENCHMARK(BM_DLoc)->Unit(benchmark::kMillisecond);

static void BM_D1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(d1(4.0, -0.9));
}
BENCHMARK(BM_D1);

static void BM_FiniteOracle(benchmark::State& state) {
  const auto s = uniform_square(1, 1, 1.0, 2.0, -2.6);
  const auto gs = uniform_gap_structure(2.0, 20.0);
  OracleOptions o;
  o.width = o.height = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_oracle(s, gs, o));
}
BENCHMARK(BM_FiniteOracle)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
