#include <benchmark/benchmark.h>

#include <memory>

#include "dflsim/protocol.hpp"

namespace {

struct RoundFixture {
    std::vector<dflsim::ClientState> states;
    std::vector<std::unique_ptr<dflsim::LocalObjective>> objectives;
    dflsim::TopologySchedule schedule;
    dflsim::LocalHyper hyper;

    RoundFixture(int n, int dim, dflsim::TopologyGenerator gen)
        : schedule(
              [&] {
                  dflsim::TopologyOptions opts;
                  opts.generator = gen;
                  opts.time_varying = true;
                  opts.k_out = std::max(1, n / 10);
                  return opts;
              }(),
              n, 1) {
        for (int i = 0; i < n; ++i) {
            dflsim::SeededRng rng(1, dflsim::StreamPurpose::QuadraticCenter,
                                  static_cast<std::uint64_t>(i));
            dflsim::ParamVector c(static_cast<std::size_t>(dim));
            for (std::size_t k = 0; k < c.dim(); ++k) c[k] = rng.uniform(-1.0, 1.0);
            objectives.push_back(std::make_unique<dflsim::QuadraticObjective>(std::move(c)));
        }
        states = dflsim::init_states(n, dflsim::ParamVector(static_cast<std::size_t>(dim), 0.0));
        hyper.eta_l = 0.05;
        hyper.rho = 0.05;
        hyper.alpha = 0.9;
        hyper.local_iters = 5;
        hyper.batch_size = 1;
    }
};

void BM_run_round_kout(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    RoundFixture fx(n, 256, dflsim::TopologyGenerator::DirectedKOut);
    int t = 0;
    for (auto _ : state) {
        dflsim::run_round(fx.states, fx.objectives, dflsim::AlgorithmKind::DFedSGPSM,
                          fx.schedule.round(t), fx.hyper, t, 1);
        ++t;
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_run_round_kout)->Arg(16)->Arg(64)->Arg(100);

void BM_gen_round(benchmark::State& state) {
    dflsim::TopologyOptions opts;
    opts.generator = dflsim::TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 10;
    int t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dflsim::gen_round(opts, 100, t++, 1));
    }
}
BENCHMARK(BM_gen_round);

void BM_check_b_connectivity(benchmark::State& state) {
    dflsim::TopologyOptions opts;
    opts.generator = dflsim::TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 2;
    std::vector<dflsim::DiGraphRound> rounds;
    for (int t = 0; t < 50; ++t) rounds.push_back(dflsim::gen_round(opts, 100, t, 1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dflsim::check_b_connectivity(rounds, 5));
    }
}
BENCHMARK(BM_check_b_connectivity);

} // namespace
