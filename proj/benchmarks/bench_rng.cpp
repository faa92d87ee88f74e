#include <benchmark/benchmark.h>

#include "fpk/rng.hpp"

static void BM_uniform(benchmark::State& state) {
    fpk::RngStream rng(1, fpk::StreamPurpose::chain, 0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_uniform);

static void BM_normal(benchmark::State& state) {
    fpk::RngStream rng(1, fpk::StreamPurpose::chain, 0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_normal);

static void BM_stable_half(benchmark::State& state) {
    fpk::RngStream rng(1, fpk::StreamPurpose::chain, 0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.stable_one_sided(0.5));
}
BENCHMARK(BM_stable_half);

static void BM_poisson(benchmark::State& state) {
    fpk::RngStream rng(1, fpk::StreamPurpose::chain, 0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.poisson(1.5));
}
BENCHMARK(BM_poisson);

BENCHMARK_MAIN();
