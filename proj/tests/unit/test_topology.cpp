#include <cmath>

#include "doctest.h"

#include "dflsim/errors.hpp"
#include "dflsim/param_vector.hpp"
#include "dflsim/topology.hpp"

using namespace dflsim;

namespace {

// P * v with the graph's dense weights (test-side helper)
std::vector<double> apply(const DiGraphRound& g, const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (int i = 0; i < g.size(); ++i) {
        for (int j = 0; j < g.size(); ++j) {
            out[static_cast<std::size_t>(i)] += g.weight(i, j) * v[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

} // namespace

TEST_SUITE("topology") {

TEST_CASE("complete graph columns are uniform") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::Complete;
    const auto g = gen_round(opts, 3, 0, 1);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(g.weight(i, j) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("directed ring sends to self and successor at weight 1/2") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedRing;
    const auto g = gen_round(opts, 4, 0, 1);
    for (int i = 0; i < 4; ++i) {
        CHECK(g.out_degree(i) == 2);
        CHECK(g.weight(i, i) == 0.5);
        CHECK(g.weight((i + 1) % 4, i) == 0.5);
    }
}

TEST_CASE("irregular 3-node digraph mixes mass as hand-computed") {
    // out-neighbor sets {0,1,2}, {1,2}, {2,0}
    const DiGraphRound g(3, {{0, 1, 2}, {1, 2}, {2, 0}});
    const auto w = apply(g, {1.0, 1.0, 1.0});
    CHECK(w[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("all generators stay column-stochastic") {
    for (auto gen : {TopologyGenerator::DirectedRing, TopologyGenerator::DirectedKOut,
                     TopologyGenerator::Complete, TopologyGenerator::SymmetricDoublyStochastic}) {
        for (int n : {2, 5, 9, 17}) {
            TopologyOptions opts;
            opts.generator = gen;
            opts.time_varying = true;
            opts.k_out = std::max(1, n / 3);
            for (int t = 0; t < 5; ++t) {
                const auto g = gen_round(opts, n, t, 11 + t);
                CHECK(g.max_column_residual() <= 1e-12);
                for (int i = 0; i < n; ++i) {
                    const auto& nb = g.out_neighbors(i);
                    CHECK(std::find(nb.begin(), nb.end(), i) != nb.end()); // self-loop
                }
            }
        }
    }
}

TEST_CASE("static schedules repeat the round-0 draw") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.time_varying = false;
    opts.k_out = 2;
    const TopologySchedule sched(opts, 8, 5);
    const auto g0 = sched.round(0);
    const auto g7 = sched.round(7);
    for (int i = 0; i < 8; ++i) CHECK(g0.out_neighbors(i) == g7.out_neighbors(i));

    opts.time_varying = true;
    const TopologySchedule varying(opts, 8, 5);
    bool any_difference = false;
    for (int t = 1; t < 5 && !any_difference; ++t) {
        for (int i = 0; i < 8; ++i) {
            if (varying.round(t).out_neighbors(i) != varying.round(0).out_neighbors(i)) {
                any_difference = true;
                break;
            }
        }
    }
    CHECK(any_difference);
}

TEST_CASE("b-connectivity verdicts") {
    TopologyOptions complete;
    complete.generator = TopologyGenerator::Complete;
    std::vector<DiGraphRound> static_complete(5, gen_round(complete, 4, 0, 1));
    CHECK(check_b_connectivity(static_complete, 1).ok);
    CHECK(check_b_connectivity(static_complete, 3).ok);

    // node 2 is a sink with only a self-loop out-edge
    std::vector<DiGraphRound> with_sink(3, DiGraphRound(3, {{0, 1, 2}, {1, 0, 2}, {2}}));
    const auto bad = check_b_connectivity(with_sink, 1);
    CHECK(!bad.ok);
    CHECK(bad.failing_window == 0);

    // alternating one-directional rounds: connected only across a window of 2
    const DiGraphRound fwd(2, {{0, 1}, {1}});
    const DiGraphRound bwd(2, {{0}, {1, 0}});
    std::vector<DiGraphRound> alternating{fwd, bwd, fwd, bwd};
    CHECK(check_b_connectivity(alternating, 2).ok);
    CHECK(!check_b_connectivity(alternating, 1).ok);
}

TEST_CASE("metropolis weights on small graphs") {
    SUBCASE("complete pair") {
        const auto g = doubly_stochastic({{0, 1}, {1, 0}});
        CHECK(g.weight(0, 0) == 0.5);
        CHECK(g.weight(0, 1) == 0.5);
        CHECK(g.weight(1, 0) == 0.5);
        CHECK(g.weight(1, 1) == 0.5);
    }
    SUBCASE("ring of four has uniform thirds") {
        const auto g = doubly_stochastic({{1, 3}, {0, 2}, {1, 3}, {2, 0}});
        for (int i = 0; i < 4; ++i) {
            CHECK(g.weight(i, i) == doctest::Approx(1.0 / 3.0));
            CHECK(g.weight(i, (i + 1) % 4) == doctest::Approx(1.0 / 3.0));
            CHECK(g.weight(i, (i + 3) % 4) == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("single node") {
        const auto g = doubly_stochastic({{0}});
        CHECK(g.weight(0, 0) == 1.0);
    }
    SUBCASE("asymmetric input is rejected") {
        CHECK_THROWS_AS(doubly_stochastic({{1}, {}}), ConfigError);
    }
}

TEST_CASE("doubly-stochastic rounds satisfy both sum rules and symmetry") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::SymmetricDoublyStochastic;
    opts.k_out = 2;
    opts.time_varying = true;
    for (int t = 0; t < 5; ++t) {
        const auto g = gen_round(opts, 9, t, 3);
        CHECK(g.max_column_residual() <= 1e-12); // undirected is a digraph special case
        CHECK(g.max_row_residual() <= 1e-12);
        CHECK(g.is_symmetric());
        CHECK(g.family() == GraphFamily::DoublyStochastic);
    }
}

TEST_CASE("neighbor selection distribution") {
    SUBCASE("equal losses give the uniform distribution") {
        const std::vector<double> f(5, 2.5);
        const auto p = neighbor_select_probs(f, 2);
        for (double v : p) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("hand-computed 3-client case") {
        const std::vector<double> f{0.0, 1.0, 1.0};
        const auto p = neighbor_select_probs(f, 0);
        const double e = std::exp(1.0);
        CHECK(p[0] == doctest::Approx(1.0 / (1.0 + 2.0 * e)).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(e / (1.0 + 2.0 * e)).epsilon(1e-12));
        CHECK(p[2] == doctest::Approx(e / (1.0 + 2.0 * e)).epsilon(1e-12));
    }
    SUBCASE("huge gaps stay normalized thanks to the max shift") {
        const std::vector<double> f{0.0, 1000.0};
        const auto p = neighbor_select_probs(f, 0);
        CHECK(std::isfinite(p[0]));
        CHECK(std::isfinite(p[1]));
        CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("invariant under shifting all losses") {
        const std::vector<double> f{0.3, 1.7, -0.4, 0.9};
        std::vector<double> shifted;
        for (double v : f) shifted.push_back(v + 123.45);
        const auto p = neighbor_select_probs(f, 1);
        const auto q = neighbor_select_probs(shifted, 1);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-9));
        }
    }
    SUBCASE("non-finite losses are rejected") {
        CHECK_THROWS_AS(neighbor_select_probs(std::vector<double>{0.0, std::nan("")}, 0), SimError);
    }
}

TEST_CASE("out-neighbor sampling") {
    SUBCASE("exhaustive draw selects everyone else") {
        SeededRng rng(1, StreamPurpose::Test);
        const std::vector<double> probs(6, 1.0 / 6.0);
        auto s = sample_out_neighbors(probs, 2, 5, rng);
        std::sort(s.begin(), s.end());
        CHECK(s == std::vector<int>{0, 1, 3, 4, 5});
    }
    SUBCASE("concentrated mass dominates the draw") {
        int hits = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            SeededRng rng(static_cast<std::uint64_t>(trial), StreamPurpose::Test);
            const std::vector<double> probs{0.0005, 0.999, 0.0005};
            const auto s = sample_out_neighbors(probs, 0, 1, rng);
            if (s[0] == 1) ++hits;
        }
        CHECK(hits >= 990);
    }
    SUBCASE("same seed, same set") {
        const std::vector<double> probs{0.2, 0.3, 0.1, 0.4};
        SeededRng a(5, StreamPurpose::Test), b(5, StreamPurpose::Test);
        CHECK(sample_out_neighbors(probs, 1, 2, a) == sample_out_neighbors(probs, 1, 2, b));
    }
    SUBCASE("k beyond the support is rejected") {
        SeededRng rng(1, StreamPurpose::Test);
        const std::vector<double> probs(4, 0.25);
        CHECK_THROWS_AS(sample_out_neighbors(probs, 0, 4, rng), SimError);
    }
}

TEST_CASE("strategy rounds are valid digraphs") {
    const std::vector<double> f{0.1, 0.9, 0.4, 0.7, 0.2};
    const auto g = strategy_round(f, 2, 3, 17);
    CHECK(g.size() == 5);
    CHECK(g.max_column_residual() <= 1e-12);
    for (int i = 0; i < 5; ++i) {
        CHECK(g.out_degree(i) == 3); // 2 picks + self
    }
    // deterministic per (seed, round)
    const auto h = strategy_round(f, 2, 3, 17);
    for (int i = 0; i < 5; ++i) CHECK(g.out_neighbors(i) == h.out_neighbors(i));
}

TEST_CASE("k_out default scales with n") {
    CHECK(default_k_out(100) == 10);
    CHECK(default_k_out(16) == 1);
    CHECK(default_k_out(5) == 1);
}

TEST_CASE("k_out bounds are enforced") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.k_out = 9;
    CHECK_THROWS_AS(gen_round(opts, 5, 0, 1), ConfigError);
}

} // TEST_SUITE
