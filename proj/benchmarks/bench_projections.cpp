#include <benchmark/benchmark.h>

#include "l2e/projections.hpp"
#include "l2e/random.hpp"

namespace {

Eigen::VectorXd noisy_trend(l2e::Index n, std::uint64_t seed)
{
    l2e::Rng rng(seed);
    Eigen::VectorXd v(n);
    for (l2e::Index i = 0; i < n; ++i) v[i] = 0.01 * static_cast<double>(i) + rng.normal();
    return v;
}

} // namespace

static void BM_Pava(benchmark::State& state)
{
    const auto n = static_cast<l2e::Index>(state.range(0));
    const Eigen::VectorXd v = noisy_trend(n, 1);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (auto _ : state) {
        Eigen::VectorXd fit = l2e::project_isotonic(v, w);
        benchmark::DoNotOptimize(fit.data());
    }
    state.SetComplexityN(state.range(0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Pava)->RangeMultiplier(4)->Range(256, 1 << 18)->Complexity(benchmark::oN);

static void BM_SparseProjection(benchmark::State& state)
{
    const auto n = static_cast<l2e::Index>(state.range(0));
    const Eigen::VectorXd v = noisy_trend(n, 2);
    for (auto _ : state) {
        Eigen::VectorXd p = l2e::project_sparse(v, n / 10);
        benchmark::DoNotOptimize(p.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SparseProjection)->RangeMultiplier(4)->Range(256, 1 << 18)->Complexity();
