#include <benchmark/benchmark.h>

#include "fpk/catalog.hpp"
#include "fpk/feynman.hpp"

using namespace fpk;

static void BM_heat_chain(benchmark::State& state) {
    chernoff::ChernoffStep step(catalog::heat(0.5));
    const int n = static_cast<int>(state.range(0));
    std::uint32_t idx = 0;
    for (auto _ : state) {
        RngStream rng(1, StreamPurpose::chain, 0, idx++);
        benchmark::DoNotOptimize(feynman::sample_chain(step, n, 1.0, Vec::scalar(0), rng));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_heat_chain)->Arg(16)->Arg(64)->Arg(256);

static void BM_killed_estimate(benchmark::State& state) {
    const model::Domain g = model::Domain::interval(0.0, 3.14159265358979323846);
    chernoff::ChernoffStep step(catalog::heat(1.0), g, chernoff::StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(1);
    feynman::MCSpec mc;
    mc.samples = state.range(0);
    mc.seed = 9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            feynman::feynman_estimate(step, 64, 0.5, f0, {Vec::scalar(1.2)}, mc, 1));
    }
    state.SetItemsProcessed(state.iterations() * mc.samples * 64);
}
BENCHMARK(BM_killed_estimate)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_jump_chain(benchmark::State& state) {
    chernoff::ChernoffStep step(catalog::compound_poisson());
    std::uint32_t idx = 0;
    for (auto _ : state) {
        RngStream rng(1, StreamPurpose::chain, 0, idx++);
        benchmark::DoNotOptimize(feynman::sample_chain(step, 64, 1.0, Vec::scalar(0), rng));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_jump_chain);

BENCHMARK_MAIN();
