// Microbenchmarks for the sampling primitives.  These are the inner-loop
// costs of every solver: sampler rebuilds are O(d), draws O(log d), and the
// dot-product estimator trades accuracy for sample count.
#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "sublinopt/rng.hpp"
#include "sublinopt/sampling.hpp"

using namespace sublinopt;

namespace {

std::vector<double> random_unit(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(d);
    double ss = 0.0;
    for (double& x : v) {
        x = rng.normal();
        ss += x * x;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& x : v) x *= inv;
    return v;
}

void BM_L2SamplerAssign(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const std::vector<double> x = random_unit(d, 1);
    L2Sampler sampler;
    for (auto _ : state) {
        sampler.assign(x);
        benchmark::DoNotOptimize(sampler.sq_norm());
    }
    state.SetItemsProcessed(state.iterations() * d);
}
BENCHMARK(BM_L2SamplerAssign)->Range(1 << 10, 1 << 17);

void BM_L2SampleDraw(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    const std::vector<double> x = random_unit(d, 2);
    L2Sampler sampler;
    sampler.assign(x);
    Rng rng(3);
    for (auto _ : state) {
        auto s = sampler.sample(rng);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_L2SampleDraw)->Range(1 << 10, 1 << 17);

void BM_L1Sample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    Rng rng(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(l1_sample(p, rng));
    }
}
BENCHMARK(BM_L1Sample)->Range(1 << 8, 1 << 14);

// state.range(0) is 1/eps; the sample count scales like eps^-2 log(1/delta).
void BM_EstimateDot(benchmark::State& state) {
    const double eps = 1.0 / static_cast<double>(state.range(0));
    const std::vector<double> u = random_unit(1000, 5);
    const std::vector<double> v = random_unit(1000, 6);
    Rng rng(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_dot(u, v, eps, 0.1, rng));
    }
}
BENCHMARK(BM_EstimateDot)->Arg(5)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
