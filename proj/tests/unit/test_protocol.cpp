#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"

#include "dflsim/errors.hpp"
#include "dflsim/grad_check.hpp"
#include "dflsim/protocol.hpp"

using namespace dflsim;

namespace {

std::vector<std::unique_ptr<LocalObjective>> quadratics(const std::vector<ParamVector>& centers) {
    std::vector<std::unique_ptr<LocalObjective>> objs;
    for (const auto& c : centers) objs.push_back(std::make_unique<QuadraticObjective>(c));
    return objs;
}

std::vector<std::unique_ptr<LocalObjective>> logistic_bank(int n_clients, std::uint64_t seed,
                                                           std::shared_ptr<const Dataset>* out_data) {
    auto tt = make_synthetic(2, 20 * n_clients, 3, 3.0, seed);
    auto data = std::make_shared<Dataset>(std::move(tt.train));
    if (out_data) *out_data = data;
    std::vector<std::unique_ptr<LocalObjective>> objs;
    const int per = data->size() / n_clients;
    for (int i = 0; i < n_clients; ++i) {
        std::vector<int> shard;
        for (int s = i * per; s < (i + 1) * per; ++s) shard.push_back(s);
        objs.push_back(std::make_unique<LogisticObjective>(data, std::move(shard)));
    }
    return objs;
}

LocalHyper mixing_only() {
    LocalHyper h;
    h.eta_l = 0.0;
    h.local_iters = 1;
    h.batch_size = 1;
    return h;
}

bool states_bitwise_equal(const std::vector<ClientState>& a, const std::vector<ClientState>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i].x == b[i].x) || a[i].w != b[i].w) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("protocol") {

TEST_CASE("one complete-graph round reaches exact consensus under pure mixing") {
    const int n = 4;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::Complete;
    const auto graph = gen_round(opts, n, 0, 1);

    std::vector<ClientState> states = init_states(n, ParamVector{0.0, 0.0});
    states[0].x = ParamVector{4.0, 0.0};
    states[1].x = ParamVector{0.0, 4.0};
    states[2].x = ParamVector{-2.0, 2.0};
    states[3].x = ParamVector{6.0, -6.0};
    const ParamVector xbar0 = mean_x(states);

    auto objs = quadratics(std::vector<ParamVector>(n, ParamVector{0.0, 0.0}));
    run_round(states, objs, AlgorithmKind::DFedSGPSM, graph, mixing_only(), 0, 1);

    for (const auto& st : states) {
        const ParamVector z = debias(st.x, st.w);
        CHECK(max_abs_diff(z, xbar0) < 1e-12);
    }
    CHECK(consensus_error(states) < 1e-12);
}

TEST_CASE("3-node irregular digraph mixes to the hand-computed state") {
    const DiGraphRound graph(3, {{0, 1, 2}, {1, 2}, {2, 0}});
    std::vector<ClientState> states = init_states(3, ParamVector{1.0});
    auto objs = quadratics(std::vector<ParamVector>(3, ParamVector{0.0}));

    run_round(states, objs, AlgorithmKind::DFedSGPSM, graph, mixing_only(), 0, 1);

    const double expect[] = {5.0 / 6.0, 5.0 / 6.0, 4.0 / 3.0};
    for (int i = 0; i < 3; ++i) {
        CHECK(states[static_cast<std::size_t>(i)].w == doctest::Approx(expect[i]).epsilon(1e-15));
        CHECK(states[static_cast<std::size_t>(i)].x[0] ==
              doctest::Approx(expect[i]).epsilon(1e-15));
        const ParamVector z = debias(states[static_cast<std::size_t>(i)].x,
                                     states[static_cast<std::size_t>(i)].w);
        CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("consensus_error hand values") {
    std::vector<ClientState> same = init_states(3, ParamVector{0.5, -1.0});
    CHECK(consensus_error(same) == 0.0);

    std::vector<ClientState> two = init_states(2, ParamVector{0.0});
    two[1].x = ParamVector{2.0};
    CHECK(consensus_error(two) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("push-sum conserves mass across many rounds") {
    const int n = 6;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 2;
    const TopologySchedule sched(opts, n, 11);

    std::shared_ptr<const Dataset> data;
    auto objs = logistic_bank(n, 13, &data);
    std::vector<ClientState> states =
        init_states(n, ParamVector(static_cast<std::size_t>(objs.front()->param_dim()), 0.0));

    LocalHyper hyper;
    hyper.eta_l = 0.1;
    hyper.rho = 0.1;
    hyper.alpha = 0.9;
    hyper.local_iters = 3;
    hyper.batch_size = 8;

    for (int t = 0; t < 40; ++t) {
        const auto inv =
            run_round(states, objs, AlgorithmKind::DFedSGPSM, sched.round(t), hyper, t, 11);
        CHECK(inv.w_sum_residual <= 1e-9 * n);
        CHECK(inv.x_drift <= 1e-9 * std::max(1.0, inv.sum_x_norm));
        CHECK(inv.min_w > 0.0);
    }
}

TEST_CASE("corollary reduction: rho=0, alpha=0 collapses onto OSGP bitwise") {
    const int n = 5;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 2;
    const TopologySchedule sched(opts, n, 19);

    std::shared_ptr<const Dataset> data;
    auto objs_a = logistic_bank(n, 23, &data);
    auto objs_b = logistic_bank(n, 23, nullptr);
    const ParamVector x0(static_cast<std::size_t>(objs_a.front()->param_dim()), 0.0);
    auto a = init_states(n, x0);
    auto b = init_states(n, x0);

    LocalHyper full;
    full.eta_l = 0.1;
    full.rho = 0.0;
    full.alpha = 0.0;
    full.local_iters = 4;
    full.batch_size = 8;

    for (int t = 0; t < 15; ++t) {
        const auto g = sched.round(t);
        run_round(a, objs_a, AlgorithmKind::DFedSGPSM, g, full, t, 19);
        run_round(b, objs_b, AlgorithmKind::OSGP, g, full, t, 19);
        CHECK(states_bitwise_equal(a, b));
    }
}

TEST_CASE("baseline reduction chain is bitwise") {
    const int n = 4;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::SymmetricDoublyStochastic;
    opts.time_varying = true;
    opts.k_out = 2;
    const TopologySchedule sched(opts, n, 29);

    std::shared_ptr<const Dataset> data;
    auto mk_states = [&](std::vector<std::unique_ptr<LocalObjective>>& objs) {
        return init_states(n, ParamVector(static_cast<std::size_t>(objs.front()->param_dim()), 0.0));
    };

    SUBCASE("DFedSAM at rho=0 is DFedAvg") {
        auto objs_a = logistic_bank(n, 31, &data);
        auto objs_b = logistic_bank(n, 31, nullptr);
        auto a = mk_states(objs_a);
        auto b = mk_states(objs_b);
        LocalHyper h;
        h.eta_l = 0.1;
        h.rho = 0.0;
        h.local_iters = 3;
        h.batch_size = 8;
        for (int t = 0; t < 10; ++t) {
            const auto g = sched.round(t);
            run_round(a, objs_a, AlgorithmKind::DFedSAM, g, h, t, 29);
            run_round(b, objs_b, AlgorithmKind::DFedAvg, g, h, t, 29);
            CHECK(states_bitwise_equal(a, b));
        }
    }
    SUBCASE("DFedAvgM at alpha=0 is DFedAvg") {
        auto objs_a = logistic_bank(n, 37, &data);
        auto objs_b = logistic_bank(n, 37, nullptr);
        auto a = mk_states(objs_a);
        auto b = mk_states(objs_b);
        LocalHyper h;
        h.eta_l = 0.1;
        h.alpha = 0.0;
        h.local_iters = 3;
        h.batch_size = 8;
        for (int t = 0; t < 10; ++t) {
            const auto g = sched.round(t);
            run_round(a, objs_a, AlgorithmKind::DFedAvgM, g, h, t, 37);
            run_round(b, objs_b, AlgorithmKind::DFedAvg, g, h, t, 37);
            CHECK(states_bitwise_equal(a, b));
        }
    }
    SUBCASE("SGP equals OSGP at K=1") {
        TopologyOptions push;
        push.generator = TopologyGenerator::DirectedKOut;
        push.time_varying = true;
        push.k_out = 2;
        const TopologySchedule psched(push, n, 41);
        auto objs_a = logistic_bank(n, 43, &data);
        auto objs_b = logistic_bank(n, 43, nullptr);
        auto a = mk_states(objs_a);
        auto b = mk_states(objs_b);
        LocalHyper h;
        h.eta_l = 0.1;
        h.local_iters = 1;
        h.batch_size = 8;
        for (int t = 0; t < 10; ++t) {
            const auto g = psched.round(t);
            run_round(a, objs_a, AlgorithmKind::SGP, g, h, t, 41);
            run_round(b, objs_b, AlgorithmKind::OSGP, g, h, t, 41);
            CHECK(states_bitwise_equal(a, b));
        }
    }
}

TEST_CASE("thread count cannot change results") {
    const int n = 8;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 2;
    const TopologySchedule sched(opts, n, 47);

    std::shared_ptr<const Dataset> data;
    auto objs_a = logistic_bank(n, 53, &data);
    auto objs_b = logistic_bank(n, 53, nullptr);
    auto a = init_states(n, ParamVector(static_cast<std::size_t>(objs_a.front()->param_dim()), 0.0));
    auto b = a;

    LocalHyper h;
    h.eta_l = 0.1;
    h.rho = 0.1;
    h.alpha = 0.9;
    h.local_iters = 3;
    h.batch_size = 8;

    for (int t = 0; t < 8; ++t) {
        const auto g = sched.round(t);
        run_round(a, objs_a, AlgorithmKind::DFedSGPSM, g, h, t, 47, /*threads=*/1);
        run_round(b, objs_b, AlgorithmKind::DFedSGPSM, g, h, t, 47, /*threads=*/4);
        CHECK(states_bitwise_equal(a, b));
    }
}

TEST_CASE("fedavg broadcasts the cohort mean to every client") {
    const int n = 10;
    std::shared_ptr<const Dataset> data;
    auto objs = logistic_bank(n, 59, &data);
    auto states = init_states(n, ParamVector(static_cast<std::size_t>(objs.front()->param_dim()), 0.0));

    LocalHyper h;
    h.eta_l = 0.1;
    h.local_iters = 2;
    h.batch_size = 8;
    const DiGraphRound unused(n, {}); // ignored by the fedavg path

    run_round(states, objs, AlgorithmKind::FedAvg, unused, h, 0, 59);
    for (int i = 1; i < n; ++i) {
        CHECK(states[static_cast<std::size_t>(i)].x == states[0].x);
        CHECK(states[static_cast<std::size_t>(i)].w == 1.0);
    }
    // someone actually trained
    CHECK(l2_norm(states[0].x) > 0.0);
}

TEST_CASE("family mismatch is rejected") {
    const int n = 4;
    TopologyOptions push;
    push.generator = TopologyGenerator::DirectedKOut;
    push.k_out = 2;
    const auto digraph = gen_round(push, n, 0, 61);

    std::shared_ptr<const Dataset> data;
    auto objs = logistic_bank(n, 61, &data);
    auto states = init_states(n, ParamVector(static_cast<std::size_t>(objs.front()->param_dim()), 0.0));

    LocalHyper h;
    h.eta_l = 0.1;
    h.local_iters = 1;
    h.batch_size = 8;
    CHECK_THROWS_AS(run_round(states, objs, AlgorithmKind::DFedAvg, digraph, h, 0, 61), ConfigError);
}

TEST_CASE("weight underflow aborts the round") {
    const int n = 3;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::Complete;
    const auto graph = gen_round(opts, n, 0, 1);
    auto objs = quadratics(std::vector<ParamVector>(n, ParamVector{0.0}));
    auto states = init_states(n, ParamVector{1.0});
    for (auto& st : states) st.w = 1e-12;

    CHECK_THROWS_WITH_AS(
        run_round(states, objs, AlgorithmKind::DFedSGPSM, graph, mixing_only(), 0, 1),
        doctest::Contains("underflow"), ProtocolError);
}

TEST_CASE("strategy kind refreshes loss snapshots") {
    const int n = 4;
    std::shared_ptr<const Dataset> data;
    auto objs = logistic_bank(n, 67, &data);
    auto states = init_states(n, ParamVector(static_cast<std::size_t>(objs.front()->param_dim()), 0.0));
    for (auto& st : states) st.last_loss = -1.0;

    const std::vector<double> losses(static_cast<std::size_t>(n), 0.5);
    const auto graph = strategy_round(losses, 2, 0, 67);
    LocalHyper h;
    h.eta_l = 0.1;
    h.local_iters = 2;
    h.batch_size = 8;
    run_round(states, objs, AlgorithmKind::DFedSGPSMS, graph, h, 0, 67, 1,
              /*refresh_last_loss=*/true);
    for (const auto& st : states) CHECK(st.last_loss >= 0.0);
}

} // TEST_SUITE
