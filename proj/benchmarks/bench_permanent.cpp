#include "qmetro/multiport.hpp"

#include <benchmark/benchmark.h>

using namespace qmetro;

// Full bunched-output amplitude: an n x n permanent per polarization block.
static void BM_TransitionAmplitude(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const FockState in = FockState::one_per_port(N, 0);
    FockState out(N);
    out.at(0, Pol::H) = N;
    for (auto _ : state) {
        benchmark::DoNotOptimize(transition_amplitude(N, in, out, Statistics::boson));
    }
}
BENCHMARK(BM_TransitionAmplitude)->DenseRange(4, 12, 2);

static void BM_ExactAmplitude(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const FockState in = FockState::one_per_port(N, 0);
    FockState out(N);
    out.at(0, Pol::H) = N;
    for (auto _ : state) {
        benchmark::DoNotOptimize(transition_amplitude_exact(N, in, out, Statistics::boson));
    }
}
BENCHMARK(BM_ExactAmplitude)->DenseRange(4, 8, 2);
