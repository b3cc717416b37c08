// End-to-end solver benchmarks.  entries_read is surfaced as a counter next
// to wall time so scaling runs show the access sublinearity directly; the
// exact-margin oracle is included for contrast (it scans every entry).
#include <benchmark/benchmark.h>

#include <cstddef>
#include <map>
#include <vector>

#include "sublinopt/generate.hpp"
#include "sublinopt/rng.hpp"
#include "sublinopt/solvers.hpp"
#include "sublinopt/verify.hpp"

using namespace sublinopt;

namespace {

// Benchmark fixtures re-enter the function once per repetition; cache the
// generated instances so setup cost stays out of the timed region.
const SeparableInstance& separable(std::size_t n, std::size_t d) {
    static std::map<std::pair<std::size_t, std::size_t>, SeparableInstance> cache;
    auto [it, inserted] = cache.try_emplace({n, d});
    if (inserted) it->second = gen_separable(n, d, 0.3, 7);
    return it->second;
}

void BM_Perceptron(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const SeparableInstance& inst = separable(n, n);
    SolverConfig cfg;
    cfg.eps = 0.2;
    cfg.profile = SolverConfig::Profile::bench;
    std::uint64_t reads = 0, runs = 0;
    for (auto _ : state) {
        cfg.seed = 100 + runs;
        SolutionReport rep = sublinear_perceptron(inst.m, cfg);
        benchmark::DoNotOptimize(rep.achieved_value);
        reads += rep.entries_read;
        ++runs;
    }
    state.counters["entries_read"] =
        benchmark::Counter(static_cast<double>(reads) / runs);
    state.counters["nnz"] = benchmark::Counter(static_cast<double>(inst.m.nnz()));
}
BENCHMARK(BM_Perceptron)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_PerceptronSkip(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const SeparableInstance& inst = separable(n, n);
    SolverConfig cfg;
    cfg.eps = 0.2;
    cfg.profile = SolverConfig::Profile::bench;
    cfg.skip_optimization = true;
    std::uint64_t reads = 0, runs = 0;
    for (auto _ : state) {
        cfg.seed = 100 + runs;
        SolutionReport rep = sublinear_perceptron(inst.m, cfg);
        benchmark::DoNotOptimize(rep.achieved_value);
        reads += rep.entries_read;
        ++runs;
    }
    state.counters["entries_read"] =
        benchmark::Counter(static_cast<double>(reads) / runs);
}
BENCHMARK(BM_PerceptronSkip)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Meb(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    static std::map<std::size_t, MebKnownInstance> cache;
    auto [it, inserted] = cache.try_emplace(n);
    if (inserted) it->second = gen_meb_known(n, 20, 0.3, 11);
    SolverConfig cfg;
    cfg.eps = 0.3;
    std::uint64_t runs = 0;
    for (auto _ : state) {
        cfg.seed = 200 + runs++;
        SolutionReport rep = sublinear_meb(it->second.m, cfg);
        benchmark::DoNotOptimize(rep.achieved_value);
    }
    state.SetLabel("eps=0.3");
}
BENCHMARK(BM_Meb)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ZeroSumGame(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    static std::map<std::size_t, DataMatrix> cache;
    auto [it, inserted] = cache.try_emplace(n);
    if (inserted) {
        DataMatrix m(n, n);
        Rng rng(13);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m.set_entry(i, j, 2.0 * rng.uniform01() - 1.0);
        m.finalize(/*enforce_norms=*/false);
        it->second = std::move(m);
    }
    SolverConfig cfg;
    cfg.eps = 0.2;
    std::uint64_t runs = 0;
    for (auto _ : state) {
        cfg.seed = 300 + runs++;
        SolutionReport rep = zero_sum_game(it->second, cfg);
        benchmark::DoNotOptimize(rep.achieved_value);
    }
}
BENCHMARK(BM_ZeroSumGame)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

// Full-scan baseline the sublinear solvers are competing against.
void BM_ExactMargin(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const SeparableInstance& inst = separable(n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_margin(inst.m));
    }
}
BENCHMARK(BM_ExactMargin)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
