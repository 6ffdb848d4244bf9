#include <benchmark/benchmark.h>

#include "elbt/backtest.hpp"
#include "elbt/synth.hpp"

namespace {

elbt::PeriodLedger ledger_of_size(int accounts) {
    // random_ledger draws its size in [1, max_accounts]; search seeds for a large draw.
    elbt::PeriodLedger best = elbt::random_ledger(1, {.max_accounts = accounts});
    for (std::uint64_t seed = 2; seed < 40; ++seed) {
        auto l = elbt::random_ledger(seed, {.max_accounts = accounts});
        if (l.bop().size() + l.eop().size() > best.bop().size() + best.eop().size()) best = std::move(l);
    }
    return best;
}

void BM_Classify(benchmark::State& state) {
    const auto l = ledger_of_size(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(elbt::classify_transitions(l));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(l.bop().size() + l.eop().size()));
}

void BM_Decompose(benchmark::State& state) {
    const auto l = ledger_of_size(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(elbt::decompose_ior(l));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(l.bop().size() + l.eop().size()));
}

void BM_SegmentReport(benchmark::State& state) {
    const auto l = ledger_of_size(static_cast<int>(state.range(0)));
    const auto t = elbt::classify_transitions(l);
    const std::vector<elbt::Dimension> dims(elbt::kAllDimensions.begin(), elbt::kAllDimensions.end());
    for (auto _ : state) benchmark::DoNotOptimize(elbt::segment_report(l, t, dims));
}

void BM_AppendixCase(benchmark::State& state) {
    for (auto _ : state) {
        for (const auto& l : elbt::generate_appendix_case(static_cast<int>(state.range(0)))) {
            benchmark::DoNotOptimize(elbt::decompose_ior(l));
        }
    }
}

void BM_SimulateLifecycle(benchmark::State& state) {
    elbt::ScenarioConfig cfg;
    cfg.n_accounts = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(elbt::simulate_lifecycle(cfg));
}

}  // namespace

BENCHMARK(BM_Classify)->Arg(1'000)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Decompose)->Arg(1'000)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SegmentReport)->Arg(10'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AppendixCase)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateLifecycle)->Arg(10'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
