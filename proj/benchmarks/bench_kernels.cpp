#include <benchmark/benchmark.h>

#include "bbm/girsanov.hpp"
#include "bbm/kernels.hpp"
#include "bbm/rng.hpp"

namespace {

void BM_GaussianDraws(benchmark::State& state) {
    bbm::RngStream rng(1, 1);
    double acc = 0.0;
    for (auto _ : state) acc += rng.next_gaussian();
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_GaussianDraws);

void BM_BesselPath(benchmark::State& state) {
    const auto grid = bbm::uniform_grid(1.0, 1.0 / static_cast<double>(state.range(0)));
    bbm::RngStream rng(1, 2);
    for (auto _ : state) {
        const auto path = bbm::sample_bessel_path(3, 1.0, grid, rng);
        benchmark::DoNotOptimize(path.values.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BesselPath)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_GirsanovWeight(benchmark::State& state) {
    const auto grid = bbm::uniform_grid(1.0, 1e-3);
    bbm::RngStream rng(1, 3);
    const auto path = bbm::sample_bm_path(5.0, grid, rng);
    const bbm::ModelParams params(5);
    for (auto _ : state) {
        const auto w = bbm::girsanov_log_weight(path, params);
        benchmark::DoNotOptimize(w.log_weight);
    }
}
BENCHMARK(BM_GirsanovWeight);

}  // namespace
