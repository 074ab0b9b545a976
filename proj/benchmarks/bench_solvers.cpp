#include <benchmark/benchmark.h>

#include "l2e/block_descent.hpp"
#include "l2e/experiments.hpp"
#include "l2e/majorize.hpp"
#include "l2e/pg.hpp"

namespace {

l2e::GeneratedData isotonic(l2e::Index n)
{
    return l2e::gen_isotonic(l2e::IsotonicScenario{n, n / 10, 14.0, 3});
}

} // namespace

// One MM beta update from the default start, for each penalty family.
static void BM_MmBetaUpdate(benchmark::State& state)
{
    const l2e::GeneratedData g = l2e::gen_sparse(l2e::SparseScenario{});
    const l2e::InitialValues init = l2e::init_default(g.data);
    const l2e::FitState s = l2e::make_state(g.data, init.beta, init.eta);
    const double lmax = l2e::lambda_max(g.data);
    l2e::Penalty pen = l2e::NoPenalty{};
    switch (state.range(0)) {
    case 1: pen = l2e::LassoPenalty{0.1 * lmax}; break;
    case 2: pen = l2e::McpPenalty{0.1 * lmax, 3.0}; break;
    case 3: pen = l2e::DistancePenalty{1e4, std::nullopt, l2e::ConstraintSet::sparse(5)}; break;
    default: break;
    }
    state.SetLabel(l2e::describe_penalty(pen));
    for (auto _ : state) {
        l2e::BetaUpdate up = l2e::mm_beta_update(g.data, s, pen);
        benchmark::DoNotOptimize(up.beta.data());
    }
}
BENCHMARK(BM_MmBetaUpdate)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

static void BM_IsotonicBetaUpdate(benchmark::State& state)
{
    const l2e::GeneratedData g = isotonic(state.range(0));
    const l2e::InitialValues init = l2e::init_default(g.data);
    const l2e::FitState s = l2e::make_state(g.data, init.beta, init.eta);
    const l2e::Penalty pen = l2e::IndicatorPenalty{l2e::ConstraintSet::isotonic()};
    for (auto _ : state) {
        l2e::BetaUpdate up = l2e::mm_beta_update(g.data, s, pen);
        benchmark::DoNotOptimize(up.beta.data());
    }
}
BENCHMARK(BM_IsotonicBetaUpdate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

static void BM_FitIsotonicMm(benchmark::State& state)
{
    const l2e::GeneratedData g = isotonic(state.range(0));
    const l2e::Penalty pen = l2e::IndicatorPenalty{l2e::ConstraintSet::isotonic()};
    int outer = 0;
    for (auto _ : state) {
        l2e::FitReport r = l2e::fit_l2e(g.data, pen);
        outer = r.outer_iters;
        benchmark::DoNotOptimize(r.beta.data());
    }
    state.counters["outer"] = outer;
}
BENCHMARK(BM_FitIsotonicMm)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_FitIsotonicPg(benchmark::State& state)
{
    const l2e::GeneratedData g = isotonic(state.range(0));
    const l2e::Penalty pen = l2e::IndicatorPenalty{l2e::ConstraintSet::isotonic()};
    int outer = 0;
    for (auto _ : state) {
        l2e::FitReport r = l2e::fit_pg(g.data, pen);
        outer = r.outer_iters;
        benchmark::DoNotOptimize(r.beta.data());
    }
    state.counters["outer"] = outer;
}
BENCHMARK(BM_FitIsotonicPg)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_FitSparseDistance(benchmark::State& state)
{
    const l2e::GeneratedData g = l2e::gen_sparse(l2e::SparseScenario{});
    const l2e::DistancePenalty pen{1e8, std::nullopt, l2e::ConstraintSet::sparse(5)};
    for (auto _ : state) {
        l2e::FitReport r = l2e::fit_l2e_distance_path(g.data, pen);
        benchmark::DoNotOptimize(r.beta.data());
    }
}
BENCHMARK(BM_FitSparseDistance)->Unit(benchmark::kMillisecond);
