#include <benchmark/benchmark.h>

#include <cmath>

#include "fpk/catalog.hpp"
#include "fpk/chernoff.hpp"
#include "fpk/oracles.hpp"
#include "fpk/quadrature.hpp"

using namespace fpk;

static void BM_gauss_legendre_nodes(benchmark::State& state) {
    for (auto _ : state) {
        // Rebuilding forces the Newton solve; the cache is keyed by size, so
        // alternate two sizes to defeat it.
        benchmark::DoNotOptimize(&GaussLegendre::get(static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_gauss_legendre_nodes)->Arg(257);

static void BM_apply_step(benchmark::State& state) {
    chernoff::ChernoffStep step(catalog::ou(1.0, 0.5));
    const auto f0 = catalog::gaussian_initial();
    for (auto _ : state)
        benchmark::DoNotOptimize(chernoff::apply_step(step, 0.5, f0, Vec::scalar(0.7)));
}
BENCHMARK(BM_apply_step);

static void BM_chernoff_iterate(benchmark::State& state) {
    chernoff::ChernoffStep step(catalog::heat(0.5));
    const auto f0 = catalog::gaussian_initial();
    chernoff::QuadratureSpec quad;
    quad.nodes = 129;
    const std::vector<Vec> grid{Vec::scalar(0)};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            chernoff::chernoff_iterate(step, static_cast<int>(state.range(0)), 1.0, f0, grid,
                                       quad));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 129 * 129);
}
BENCHMARK(BM_chernoff_iterate)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_adaptive_gk(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(oracles::integrate_adaptive(
            [](double x) { return std::exp(-x * x) * std::cos(3 * x); }, 0.0, 8.0, 1e-10));
}
BENCHMARK(BM_adaptive_gk);

BENCHMARK_MAIN();
