#include <benchmark/benchmark.h>

#include "bbm/branching.hpp"

namespace {

void BM_StreamingMax(benchmark::State& state) {
    const bbm::ModelParams params(2);
    const std::vector<double> origin{0.0, 0.0};
    const double T = static_cast<double>(state.range(0));
    std::uint64_t rep = 0;
    for (auto _ : state) {
        bbm::RngStream stream(1, bbm::derive_stream_id(0xBE9Cull, rep++));
        const auto r = bbm::sample_max_modulus(params, origin, T, bbm::PruneRule{}, 0.0, stream);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_StreamingMax)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

void BM_StreamingMaxPruned(benchmark::State& state) {
    const bbm::ModelParams params(2);
    const std::vector<double> origin{0.0, 0.0};
    bbm::PruneRule rule;
    rule.enabled = true;
    rule.K = 10.0;
    std::uint64_t rep = 0;
    for (auto _ : state) {
        bbm::RngStream stream(1, bbm::derive_stream_id(0xBE9Dull, rep++));
        const auto r = bbm::sample_max_modulus(params, origin, 12.0, rule, 0.0, stream);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_StreamingMaxPruned)->Unit(benchmark::kMillisecond);

void BM_TreeSimulation(benchmark::State& state) {
    const bbm::ModelParams params(2);
    const std::vector<double> origin{0.0, 0.0};
    bbm::SimConfig config;
    config.grid_step = 0.05;
    std::uint64_t rep = 0;
    for (auto _ : state) {
        bbm::RngStream stream(1, bbm::derive_stream_id(0xBE9Eull, rep++));
        const auto tree = bbm::simulate_tree(params, origin, bbm::StopRule::at_time(6.0),
                                             bbm::PruneRule{}, config, stream);
        benchmark::DoNotOptimize(tree.particles.size());
    }
}
BENCHMARK(BM_TreeSimulation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
