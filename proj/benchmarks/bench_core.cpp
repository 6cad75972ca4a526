#include <benchmark/benchmark.h>

#include <random>

#include "phaseavg/averaging.hpp"
#include "phaseavg/integrators.hpp"
#include "phaseavg/models/kg.hpp"
#include "phaseavg/models/rswe.hpp"
#include "phaseavg/models/spring.hpp"

using namespace phaseavg;

namespace {

SpectralState random_state(int n_fields, int n_modes, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SpectralState s(n_fields, n_modes);
    for (int f = 0; f < n_fields; ++f)
        for (int j = 0; j < n_modes; ++j) s(f, j) = Complex{dist(rng), dist(rng)};
    return s;
}

void BM_DftRoundTrip(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> field(n);
    for (auto& v : field) v = dist(rng);
    for (auto _ : state) {
        auto spec = dft_forward(field);
        auto back = dft_inverse(spec);
        benchmark::DoNotOptimize(back.data());
    }
}
BENCHMARK(BM_DftRoundTrip)->Arg(32)->Arg(128);

void BM_CircularConvolution(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_state(1, n, 2);
    for (auto _ : state) {
        auto g = circular_convolution(a.row(0), a.row(0));
        benchmark::DoNotOptimize(g.data());
    }
}
BENCHMARK(BM_CircularConvolution)->Arg(32)->Arg(64);

void BM_BuildKernel(benchmark::State& state) {
    const int count = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto kernel = build_kernel(1.0, 4.0, count);
        benchmark::DoNotOptimize(kernel.weights().data());
    }
}
BENCHMARK(BM_BuildKernel)->Arg(64)->Arg(1024);

void BM_PhaseAveragedRhsSpring(benchmark::State& state) {
    SpringParams params;
    params.rho = 2.0;
    const auto model = spring_model(params);
    const auto kernel = build_kernel(0.5, 4.0, static_cast<int>(state.range(0)));
    const auto v = random_state(3, 1, 3);
    for (auto _ : state) {
        auto rhs = phase_averaged_rhs(*model, v, 1.0, kernel);
        benchmark::DoNotOptimize(rhs.data());
    }
}
BENCHMARK(BM_PhaseAveragedRhsSpring)->Arg(8)->Arg(64);

void BM_PhaseAveragedRhsKg(benchmark::State& state) {
    GridSpec grid(32);
    const auto model = kg_model(KgParams{0.1}, grid);
    const auto kernel = build_kernel(1.0, 4.0, static_cast<int>(state.range(0)));
    const auto v = random_state(2, 32, 4);
    for (auto _ : state) {
        auto rhs = phase_averaged_rhs(*model, v, 1.0, kernel);
        benchmark::DoNotOptimize(rhs.data());
    }
}
BENCHMARK(BM_PhaseAveragedRhsKg)->Arg(64)->Arg(256);

void BM_PhaseAveragedRhsRswe(benchmark::State& state) {
    GridSpec grid(32);
    const auto model = rswe_model(RsweParams{0.1, 1e-4}, grid);
    const auto kernel = build_kernel(0.3, 4.0, static_cast<int>(state.range(0)));
    const auto v = random_state(3, 32, 5);
    for (auto _ : state) {
        auto rhs = phase_averaged_rhs(*model, v, 1.0, kernel);
        benchmark::DoNotOptimize(rhs.data());
    }
}
BENCHMARK(BM_PhaseAveragedRhsRswe)->Arg(64)->Arg(256);

void BM_MeanCorrectedStepRswe(benchmark::State& state) {
    GridSpec grid(32);
    const auto model = rswe_model(RsweParams{0.1, 1e-4}, grid);
    const auto u0 = model->initial_state();
    for (auto _ : state) {
        auto res = integrate_mean_corrected(*model, u0, 0.1, 0.1, 0.2,
                                            MeanCorrectionStrategy::local(0.2));
        benchmark::DoNotOptimize(res.u.states.data());
    }
}
BENCHMARK(BM_MeanCorrectedStepRswe);

}  // namespace

BENCHMARK_MAIN();
