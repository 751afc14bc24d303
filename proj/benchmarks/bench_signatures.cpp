#include "qmetro/multiport.hpp"

#include <benchmark/benchmark.h>

using namespace qmetro;

static void BM_SignatureSetExact(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const FockState flip = FockState::one_per_port(N, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(signature_set_exact(N, flip, Statistics::boson));
    }
}
BENCHMARK(BM_SignatureSetExact)->DenseRange(2, 6, 1)->Unit(benchmark::kMillisecond);

static void BM_SignatureSetFloat(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            signature_set(N, tau1_component_input(N, 0, 0.0), Statistics::boson));
    }
}
BENCHMARK(BM_SignatureSetFloat)->DenseRange(4, 8, 1)->Unit(benchmark::kMillisecond);

static void BM_SignatureRatio(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(signature_ratio(N));
    }
}
BENCHMARK(BM_SignatureRatio)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
