#include "dflsim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include "dflsim/dataset.hpp"
#include "dflsim/errors.hpp"
#include "dflsim/grad_check.hpp"
#include "dflsim/objective.hpp"
#include "dflsim/protocol.hpp"

namespace dflsim {

std::vector<MixingState> matrix_power_consensus_oracle(const TopologySchedule& sched,
                                                       const std::vector<ParamVector>& x0,
                                                       const std::vector<double>& w0, int rounds) {
    const int n = static_cast<int>(x0.size());
    if (static_cast<int>(w0.size()) != n) {
        throw DimMismatchError("matrix oracle: x0 has " + std::to_string(n) + " clients, w0 has " +
                               std::to_string(w0.size()));
    }
    const std::size_t dim = x0.front().dim();

    std::vector<MixingState> out;
    MixingState cur{x0, w0, {}};
    cur.z.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        cur.z[static_cast<std::size_t>(i)] = debias(cur.x[static_cast<std::size_t>(i)],
                                                    cur.w[static_cast<std::size_t>(i)]);
    }
    out.push_back(cur);

    for (int t = 0; t < rounds; ++t) {
        const DiGraphRound g = sched.round(t);
        MixingState next;
        next.x.assign(static_cast<std::size_t>(n), ParamVector(dim, 0.0));
        next.w.assign(static_cast<std::size_t>(n), 0.0);
        next.z.resize(static_cast<std::size_t>(n));
        // dense products over every (receiver, sender) pair
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double p = g.weight(i, j);
                if (p == 0.0) continue;
                for (std::size_t k = 0; k < dim; ++k) {
                    next.x[static_cast<std::size_t>(i)][k] += p * cur.x[static_cast<std::size_t>(j)][k];
                }
                next.w[static_cast<std::size_t>(i)] += p * cur.w[static_cast<std::size_t>(j)];
            }
            next.z[static_cast<std::size_t>(i)] = debias(next.x[static_cast<std::size_t>(i)],
                                                         next.w[static_cast<std::size_t>(i)]);
        }
        out.push_back(next);
        cur = std::move(next);
    }
    return out;
}

ParamVector momentum_closed_form_oracle(const LocalTrace& trace, double eta_l, double alpha,
                                        int K) {
    if (static_cast<int>(trace.size()) != K) {
        throw DimMismatchError("momentum oracle: trace has " + std::to_string(trace.size()) +
                               " entries, expected K = " + std::to_string(K));
    }
    ParamVector delta(trace.front().grad_perturbed.dim(), 0.0);
    for (int k = 1; k <= K; ++k) {
        for (int s = 1; s <= k; ++s) {
            const double coef = std::pow(alpha, k - s);
            axpy_inplace(coef, trace[static_cast<std::size_t>(s - 1)].grad_perturbed, delta);
        }
    }
    scale_inplace(-eta_l, delta);
    return delta;
}

TildeAlphaResult tilde_alpha_bound_check(double alpha, int K) {
    TildeAlphaResult r;
    double sum = 0.0;
    for (int k = 1; k <= K; ++k) {
        for (int s = 1; s <= k; ++s) {
            sum += std::pow(alpha, k - s);
        }
    }
    r.tilde_alpha = sum;
    r.bound = K / (1.0 - alpha);
    r.ok = sum > 0.0 && (alpha == 0.0 ? sum <= r.bound : sum < r.bound);
    return r;
}

// ---- the verify suite ----

namespace {

struct CheckContext {
    std::uint64_t seed;
};

std::vector<std::unique_ptr<LocalObjective>> quadratic_bank(int n, int dim, std::uint64_t seed) {
    std::vector<std::unique_ptr<LocalObjective>> objs;
    for (int i = 0; i < n; ++i) {
        SeededRng rng(seed, StreamPurpose::QuadraticCenter, static_cast<std::uint64_t>(i));
        ParamVector c(static_cast<std::size_t>(dim));
        for (std::size_t k = 0; k < c.dim(); ++k) c[k] = rng.uniform(-1.0, 1.0);
        objs.push_back(std::make_unique<QuadraticObjective>(std::move(c)));
    }
    return objs;
}

OracleReport check_column_stochasticity(const CheckContext& ctx) {
    OracleReport r{"column-stochasticity", true, 0.0, ""};
    const TopologyGenerator gens[] = {TopologyGenerator::DirectedRing,
                                      TopologyGenerator::DirectedKOut, TopologyGenerator::Complete,
                                      TopologyGenerator::SymmetricDoublyStochastic};
    for (auto gen : gens) {
        for (int n : {2, 3, 5, 8, 16}) {
            TopologyOptions opts;
            opts.generator = gen;
            opts.time_varying = true;
            opts.k_out = std::max(1, n / 4);
            for (int t = 0; t < 10; ++t) {
                const auto g = gen_round(opts, n, t, ctx.seed + t);
                r.max_error = std::max(r.max_error, g.max_column_residual());
            }
        }
    }
    r.pass = r.max_error <= 1e-12;
    if (!r.pass) r.witness = "generator sweep, seed " + std::to_string(ctx.seed);
    return r;
}

// the hand-worked 3-node digraph: N_0^out={0,1,2}, N_1^out={1,2}, N_2^out={2,0}
DiGraphRound irregular_three_node() {
    return DiGraphRound(3, {{0, 1, 2}, {1, 2}, {2, 0}});
}

OracleReport check_three_node_hand_case(const CheckContext&) {
    OracleReport r{"pushsum-3node-hand-case", true, 0.0, ""};
    const DiGraphRound g = irregular_three_node();

    std::vector<ClientState> states = init_states(3, ParamVector{1.0});
    auto objs = quadratic_bank(3, 1, 7);
    LocalHyper hyper;
    hyper.eta_l = 0.0;
    hyper.local_iters = 1;
    hyper.batch_size = 1;
    run_round(states, objs, AlgorithmKind::DFedSGPSM, g, hyper, 0, 7);

    const double expect[] = {5.0 / 6.0, 5.0 / 6.0, 4.0 / 3.0};
    for (int i = 0; i < 3; ++i) {
        r.max_error = std::max(r.max_error, std::abs(states[static_cast<std::size_t>(i)].w - expect[i]));
        r.max_error =
            std::max(r.max_error, std::abs(states[static_cast<std::size_t>(i)].x[0] - expect[i]));
        const ParamVector z = debias(states[static_cast<std::size_t>(i)].x,
                                     states[static_cast<std::size_t>(i)].w);
        r.max_error = std::max(r.max_error, std::abs(z[0] - 1.0));
    }
    r.pass = r.max_error <= 1e-12;
    if (!r.pass) r.witness = "3-node irregular digraph, x0 = w0 = 1";
    return r;
}

OracleReport check_engine_vs_matrix_oracle(const CheckContext& ctx) {
    OracleReport r{"pushsum-engine-vs-matrix-oracle", true, 0.0, ""};
    SeededRng pick(ctx.seed, StreamPurpose::Test, 11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(pick.uniform_int(7));  // 2..8
        const int rounds = 5 + static_cast<int>(pick.uniform_int(26)); // 5..30
        const int dim = 1 + static_cast<int>(pick.uniform_int(4));
        TopologyOptions opts;
        opts.generator = TopologyGenerator::DirectedKOut;
        opts.time_varying = true;
        opts.k_out = n == 2 ? 1 : 1 + static_cast<int>(pick.uniform_int(static_cast<std::uint64_t>(n - 1)));
        const std::uint64_t schedule_seed = ctx.seed * 1000 + static_cast<std::uint64_t>(trial);
        const TopologySchedule sched(opts, n, schedule_seed);

        std::vector<ParamVector> x0;
        std::vector<double> w0(static_cast<std::size_t>(n), 1.0);
        for (int i = 0; i < n; ++i) {
            ParamVector x(static_cast<std::size_t>(dim));
            for (std::size_t k = 0; k < x.dim(); ++k) x[k] = pick.uniform(-2.0, 2.0);
            x0.push_back(std::move(x));
        }

        const auto oracle = matrix_power_consensus_oracle(sched, x0, w0, rounds);

        std::vector<ClientState> states = init_states(n, ParamVector(static_cast<std::size_t>(dim)));
        for (int i = 0; i < n; ++i) states[static_cast<std::size_t>(i)].x = x0[static_cast<std::size_t>(i)];
        auto objs = quadratic_bank(n, dim, 3);
        LocalHyper hyper;
        hyper.eta_l = 0.0; // pure mixing
        hyper.local_iters = 1;
        hyper.batch_size = 1;

        for (int t = 0; t < rounds; ++t) {
            run_round(states, objs, AlgorithmKind::DFedSGPSM, sched.round(t), hyper, t,
                      schedule_seed);
            const auto& ref = oracle[static_cast<std::size_t>(t) + 1];
            for (int i = 0; i < n; ++i) {
                r.max_error = std::max(r.max_error,
                                       std::abs(states[static_cast<std::size_t>(i)].w -
                                                ref.w[static_cast<std::size_t>(i)]));
                r.max_error =
                    std::max(r.max_error, max_abs_diff(states[static_cast<std::size_t>(i)].x,
                                                       ref.x[static_cast<std::size_t>(i)]));
            }
        }
        if (r.max_error > 1e-12) {
            r.pass = false;
            r.witness = "trial " + std::to_string(trial) + ", n=" + std::to_string(n) +
                        ", T=" + std::to_string(rounds) + ", seed " + std::to_string(schedule_seed);
            return r;
        }
    }
    r.pass = true;
    return r;
}

OracleReport check_lemma2_closed_form(const CheckContext& ctx) {
    OracleReport r{"lemma2-closed-form", true, 0.0, ""};
    auto tt = make_synthetic(2, 20, 4, 3.0, ctx.seed);
    auto data = std::make_shared<Dataset>(std::move(tt.train));
    std::vector<int> shard(static_cast<std::size_t>(data->size()));
    for (int i = 0; i < data->size(); ++i) shard[static_cast<std::size_t>(i)] = i;
    LogisticObjective obj(data, shard);

    SeededRng pick(ctx.seed, StreamPurpose::Test, 12);
    for (int trial = 0; trial < 50; ++trial) {
        LocalHyper hyper;
        hyper.eta_l = pick.uniform(0.01, 0.3);
        hyper.alpha = pick.uniform(0.0, 0.95);
        hyper.rho = pick.uniform(0.0, 0.3);
        hyper.local_iters = 1 + static_cast<int>(pick.uniform_int(8));
        hyper.batch_size = 8;

        ParamVector x0(static_cast<std::size_t>(obj.param_dim()));
        for (std::size_t k = 0; k < x0.dim(); ++k) x0[k] = pick.normal() * 0.5;
        const double w = pick.uniform(0.5, 1.5);

        MinibatchSampler sampler(obj.shard_size(), hyper.batch_size, ctx.seed + trial, 0);
        LocalTrace trace;
        const ParamVector x_out = local_round(obj, x0, w, hyper, sampler, 0, &trace);

        const ParamVector engine_delta = axpy(-1.0, x0, x_out); // x_out - x0
        const ParamVector oracle_delta =
            momentum_closed_form_oracle(trace, hyper.eta_l, hyper.alpha, hyper.local_iters);
        const double scale = std::max(1.0, l2_norm(engine_delta));
        const double err = max_abs_diff(engine_delta, oracle_delta) / scale;
        r.max_error = std::max(r.max_error, err);
        if (err > 1e-10) {
            r.pass = false;
            r.witness = "trial " + std::to_string(trial) + ": K=" + std::to_string(hyper.local_iters) +
                        " alpha=" + std::to_string(hyper.alpha) + " rho=" + std::to_string(hyper.rho);
            return r;
        }
    }
    return r;
}

OracleReport check_tilde_alpha(const CheckContext&) {
    OracleReport r{"tilde-alpha-bound", true, 0.0, ""};
    for (double alpha : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95}) {
        for (int K = 1; K <= 8; ++K) {
            const auto res = tilde_alpha_bound_check(alpha, K);
            if (!res.ok) {
                r.pass = false;
                r.witness = "alpha=" + std::to_string(alpha) + " K=" + std::to_string(K);
                return r;
            }
        }
    }
    return r;
}

// reachability by BFS from every node; reference for the SCC-based check
bool strongly_connected_bfs(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    for (int src = 0; src < n; ++src) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::vector<int> queue{src};
        seen[static_cast<std::size_t>(src)] = true;
        int reached = 1;
        while (!queue.empty()) {
            const int v = queue.back();
            queue.pop_back();
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    ++reached;
                    queue.push_back(w);
                }
            }
        }
        if (reached != n) return false;
    }
    return true;
}

OracleReport check_connectivity_vs_bfs(const CheckContext& ctx) {
    OracleReport r{"b-connectivity-vs-bfs-oracle", true, 0.0, ""};
    SeededRng pick(ctx.seed, StreamPurpose::Test, 13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(pick.uniform_int(5)); // 2..6
        const int rounds = 2 + static_cast<int>(pick.uniform_int(6));
        const int window = 1 + static_cast<int>(pick.uniform_int(3));
        if (rounds < window) continue;

        // sparse random digraphs so both verdicts occur
        std::vector<DiGraphRound> graphs;
        for (int t = 0; t < rounds; ++t) {
            std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i != j && pick.uniform() < 0.25) out[static_cast<std::size_t>(i)].push_back(j);
                }
            }
            graphs.emplace_back(n, std::move(out));
        }

        const auto fast = check_b_connectivity(graphs, window);

        bool slow_ok = true;
        int slow_fail = -1;
        for (int start = 0; start + window <= rounds; ++start) {
            std::vector<std::vector<int>> uni(static_cast<std::size_t>(n));
            for (int t = start; t < start + window; ++t) {
                for (int i = 0; i < n; ++i) {
                    for (int j : graphs[static_cast<std::size_t>(t)].out_neighbors(i)) {
                        uni[static_cast<std::size_t>(i)].push_back(j);
                    }
                }
            }
            if (!strongly_connected_bfs(uni)) {
                slow_ok = false;
                slow_fail = start;
                break;
            }
        }

        if (fast.ok != slow_ok || (!fast.ok && fast.failing_window != slow_fail)) {
            r.pass = false;
            r.witness = "trial " + std::to_string(trial) + ": scc says " +
                        (fast.ok ? "ok" : std::to_string(fast.failing_window)) + ", bfs says " +
                        (slow_ok ? "ok" : std::to_string(slow_fail));
            return r;
        }
    }
    return r;
}

OracleReport check_gradients_vs_fd(const CheckContext& ctx) {
    OracleReport r{"gradient-vs-finite-difference", true, 0.0, ""};
    auto tt = make_synthetic(3, 15, 4, 3.0, ctx.seed + 5);
    auto data = std::make_shared<Dataset>(std::move(tt.train));
    std::vector<int> shard(static_cast<std::size_t>(data->size()));
    for (int i = 0; i < data->size(); ++i) shard[static_cast<std::size_t>(i)] = i;

    std::vector<std::pair<std::unique_ptr<LocalObjective>, double>> cases;
    cases.emplace_back(std::make_unique<QuadraticObjective>(ParamVector{0.3, -1.2, 0.7}), 1e-5);
    cases.emplace_back(std::make_unique<LogisticObjective>(data, shard), 1e-5);
    cases.emplace_back(std::make_unique<MlpObjective>(data, shard, 6), 1e-4);

    SeededRng pick(ctx.seed, StreamPurpose::Test, 14);
    for (const auto& [obj, tol] : cases) {
        for (int p = 0; p < 20; ++p) {
            ParamVector x(static_cast<std::size_t>(obj->param_dim()));
            for (std::size_t k = 0; k < x.dim(); ++k) x[k] = pick.normal() * 0.5;
            const ParamVector analytic = obj->gradient_full(x);
            const ParamVector fd = finite_diff_grad(
                [&](const ParamVector& q) { return obj->evaluate_full(q); }, x);
            const double err = rel_error(fd, analytic);
            r.max_error = std::max(r.max_error, err);
            if (err > tol) {
                r.pass = false;
                r.witness = "point " + std::to_string(p) + ", param_dim " +
                            std::to_string(obj->param_dim());
                return r;
            }
        }
    }
    return r;
}

OracleReport check_sam_radius(const CheckContext& ctx) {
    OracleReport r{"sam-perturbation-radius", true, 0.0, ""};
    auto tt = make_synthetic(2, 10, 3, 3.0, ctx.seed + 6);
    auto data = std::make_shared<Dataset>(std::move(tt.train));
    std::vector<int> shard(static_cast<std::size_t>(data->size()));
    for (int i = 0; i < data->size(); ++i) shard[static_cast<std::size_t>(i)] = i;
    LogisticObjective obj(data, shard);

    SeededRng pick(ctx.seed, StreamPurpose::Test, 15);
    const double rho = 0.1;
    for (int p = 0; p < 20; ++p) {
        ParamVector z(static_cast<std::size_t>(obj.param_dim()));
        for (std::size_t k = 0; k < z.dim(); ++k) z[k] = pick.normal();
        LocalTraceEntry entry;
        sam_gradient(obj, z, shard, rho, &entry);
        if (l2_norm(entry.grad_at_z) <= kSamGradFloor) continue;
        const double dist = l2_distance(entry.z_perturbed, entry.z);
        const double err = std::abs(dist - rho) / rho;
        r.max_error = std::max(r.max_error, err);
        if (err > 1e-14) {
            r.pass = false;
            r.witness = "point " + std::to_string(p);
            return r;
        }
    }
    return r;
}

OracleReport check_consensus_decay(const CheckContext& ctx) {
    OracleReport r{"consensus-geometric-decay", true, 0.0, ""};
    const int n = 6;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedRing;
    const TopologySchedule sched(opts, n, ctx.seed);

    std::vector<ClientState> states = init_states(n, ParamVector(std::size_t{2}));
    SeededRng pick(ctx.seed, StreamPurpose::Test, 16);
    for (auto& st : states) {
        for (std::size_t k = 0; k < st.x.dim(); ++k) st.x[k] = pick.uniform(-3.0, 3.0);
    }
    auto objs = quadratic_bank(n, 2, 4);
    LocalHyper hyper;
    hyper.eta_l = 0.0;
    hyper.local_iters = 1;
    hyper.batch_size = 1;

    std::vector<double> ce;
    ce.push_back(consensus_error(states));
    for (int t = 0; t < 50; ++t) {
        run_round(states, objs, AlgorithmKind::DFedSGPSM, sched.round(t), hyper, t, ctx.seed);
        ce.push_back(consensus_error(states));
    }

    // contraction measured across a full circulation of the ring
    double q_hat = 0.0;
    int measured = 0;
    for (std::size_t t = 0; t + n < ce.size(); ++t) {
        if (ce[t] < 1e-22) break;
        q_hat = std::max(q_hat, ce[t + n] / ce[t]);
        ++measured;
    }
    r.max_error = q_hat;
    r.pass = measured > 0 && q_hat < 1.0;
    if (!r.pass) r.witness = "fitted q over " + std::to_string(measured) + " windows";
    return r;
}

OracleReport check_mass_conservation(const CheckContext& ctx) {
    OracleReport r{"mass-conservation-200-rounds", true, 0.0, ""};
    const int n = 8;
    TopologyOptions opts;
    opts.generator = TopologyGenerator::DirectedKOut;
    opts.time_varying = true;
    opts.k_out = 2;
    const TopologySchedule sched(opts, n, ctx.seed);

    std::vector<ClientState> states = init_states(n, ParamVector(std::size_t{4}));
    SeededRng pick(ctx.seed, StreamPurpose::Test, 17);
    for (auto& st : states) {
        for (std::size_t k = 0; k < st.x.dim(); ++k) st.x[k] = pick.uniform(-1.0, 1.0);
    }
    auto objs = quadratic_bank(n, 4, 9);

    double worst_w = 0.0, worst_drift = 0.0;
    for (int t = 0; t < 200; ++t) {
        LocalHyper hyper;
        hyper.eta_l = 0.1 * std::pow(0.998, t);
        hyper.rho = 0.05;
        hyper.alpha = 0.9;
        hyper.local_iters = 3;
        hyper.batch_size = 1;
        const auto inv =
            run_round(states, objs, AlgorithmKind::DFedSGPSM, sched.round(t), hyper, t, ctx.seed);
        worst_w = std::max(worst_w, inv.w_sum_residual);
        worst_drift = std::max(worst_drift, inv.x_drift - 1e-9 * std::max(inv.sum_x_norm, 1e-6));
    }
    r.max_error = worst_w;
    r.pass = worst_w <= 1e-9 * n && worst_drift <= 0.0;
    if (!r.pass) r.witness = "seed " + std::to_string(ctx.seed);
    return r;
}

} // namespace

std::vector<OracleReport> run_verify_suite(std::ostream& out, std::uint64_t seed) {
    const CheckContext ctx{seed};
    std::vector<OracleReport> reports;
    reports.push_back(check_column_stochasticity(ctx));
    reports.push_back(check_three_node_hand_case(ctx));
    reports.push_back(check_engine_vs_matrix_oracle(ctx));
    reports.push_back(check_lemma2_closed_form(ctx));
    reports.push_back(check_tilde_alpha(ctx));
    reports.push_back(check_connectivity_vs_bfs(ctx));
    reports.push_back(check_gradients_vs_fd(ctx));
    reports.push_back(check_sam_radius(ctx));
    reports.push_back(check_consensus_decay(ctx));
    reports.push_back(check_mass_conservation(ctx));

    for (const auto& r : reports) {
        std::ostringstream line;
        line << (r.pass ? "[ ok ] " : "[FAIL] ") << r.check_name;
        for (std::size_t pad = r.check_name.size(); pad < 36; ++pad) line << ' ';
        line << " max_err=" << r.max_error;
        if (!r.pass && !r.witness.empty()) line << "  witness: " << r.witness;
        out << line.str() << '\n';
    }
    return reports;
}

bool all_passed(const std::vector<OracleReport>& reports) {
    return std::all_of(reports.begin(), reports.end(),
                       [](const OracleReport& r) { return r.pass; });
}

} // namespace dflsim
