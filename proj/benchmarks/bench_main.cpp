#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "cetsim/calibration.hpp"
#include "cetsim/engine.hpp"
#include "cetsim/protocols.hpp"
#include "cetsim/semantics.hpp"

using namespace cetsim;

static void BM_EventQueue(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Simulator sim;
        RngStream rng("bench/queue", 1);
        for (int i = 0; i < n; ++i)
            sim.schedule(rng.next_uniform(), EventKind::Delivered, NodeId{0}, "");
        Trace t = sim.run_until(2.0);
        benchmark::DoNotOptimize(t.events.size());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1000)->Arg(10000);

static void BM_SensingAccuracy(benchmark::State& state) {
    const CalibrationTable& table = CalibrationTable::builtin_default();
    ModeVariant gfm = ModeVariant::from_id(ModeVariant::Id::Gfm);
    double snr = 0.0;
    for (auto _ : state) {
        snr = snr >= 25.0 ? 0.0 : snr + 0.1;
        benchmark::DoNotOptimize(sensing_accuracy(gfm, Scenario::Daytime, snr, table));
    }
}
BENCHMARK(BM_SensingAccuracy);

static void BM_MinmaxNormalize(benchmark::State& state) {
    RngStream rng("bench/minmax", 2);
    std::vector<double> seq;
    for (int i = 0; i < 1024; ++i) seq.push_back(rng.next_uniform());
    for (auto _ : state) {
        auto out = minmax_normalize(seq);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_MinmaxNormalize);

static void BM_GfmRound(benchmark::State& state) {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    std::uint64_t i = 0;
    for (auto _ : state) {
        RngStream rng("bench/gfm/" + std::to_string(i++), 3);
        RoundResult r = run_gfm_round(topo, table, cfg, rng);
        benchmark::DoNotOptimize(r.accuracy);
    }
}
BENCHMARK(BM_GfmRound);

static void BM_PimRound(benchmark::State& state) {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    ModeVariant pim = *ModeVariant::parse("PIM(P+M)");
    RoundConfig cfg;
    ReputationState rep;
    std::uint64_t i = 0;
    for (auto _ : state) {
        RngStream rng("bench/pim/" + std::to_string(i++), 3);
        RoundResult r = run_pim_round(pim, topo, table, cfg, rng, &rep);
        benchmark::DoNotOptimize(r.accuracy);
    }
}
BENCHMARK(BM_PimRound);

BENCHMARK_MAIN();
