#include "qmetro/angular.hpp"

#include <benchmark/benchmark.h>

using namespace qmetro;

static void BM_SpectrumExact(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const BlochState bloch(0.4, 0.0, Parametrization::default_quadratic());
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectrum_exact(bloch, N));
    }
}
BENCHMARK(BM_SpectrumExact)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_NearlyPureDecomposition(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const BlochState bloch(0.05, 0.2, Parametrization::default_quadratic());
    for (auto _ : state) {
        benchmark::DoNotOptimize(nearly_pure_decomposition(bloch, N));
    }
}
BENCHMARK(BM_NearlyPureDecomposition)->Arg(4)->Arg(8)->Arg(10);
