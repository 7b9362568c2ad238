#include "dflsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "dflsim/errors.hpp"

namespace dflsim {
namespace {

// run fn(i) for i in [0, n) across the requested number of threads
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

const char* to_string(AlgorithmKind k) {
    switch (k) {
    case AlgorithmKind::DFedSGPSM: return "DFedSGPSM";
    case AlgorithmKind::DFedSGPSMS: return "DFedSGPSM-S";
    case AlgorithmKind::OSGP: return "OSGP";
    case AlgorithmKind::SGP: return "SGP";
    case AlgorithmKind::DPSGD: return "D-PSGD";
    case AlgorithmKind::DFedAvg: return "DFedAvg";
    case AlgorithmKind::DFedAvgM: return "DFedAvgM";
    case AlgorithmKind::DFedSAM: return "DFedSAM";
    case AlgorithmKind::FedAvg: return "FedAvg";
    }
    return "?";
}

AlgorithmKind algorithm_from_string(const std::string& name) {
    if (name == "DFedSGPSM") return AlgorithmKind::DFedSGPSM;
    if (name == "DFedSGPSM-S" || name == "DFedSGPSMS") return AlgorithmKind::DFedSGPSMS;
    if (name == "OSGP") return AlgorithmKind::OSGP;
    if (name == "SGP") return AlgorithmKind::SGP;
    if (name == "D-PSGD" || name == "DPSGD") return AlgorithmKind::DPSGD;
    if (name == "DFedAvg") return AlgorithmKind::DFedAvg;
    if (name == "DFedAvgM") return AlgorithmKind::DFedAvgM;
    if (name == "DFedSAM") return AlgorithmKind::DFedSAM;
    if (name == "FedAvg") return AlgorithmKind::FedAvg;
    throw ConfigError("unknown algorithm: " + name);
}

bool uses_push_sum(AlgorithmKind k) {
    switch (k) {
    case AlgorithmKind::DFedSGPSM:
    case AlgorithmKind::DFedSGPSMS:
    case AlgorithmKind::OSGP:
    case AlgorithmKind::SGP:
        return true;
    default:
        return false;
    }
}

bool uses_strategy_selection(AlgorithmKind k) {
    return k == AlgorithmKind::DFedSGPSMS;
}

bool is_decentralized(AlgorithmKind k) {
    return k != AlgorithmKind::FedAvg;
}

GraphFamily required_family(AlgorithmKind k) {
    return uses_push_sum(k) ? GraphFamily::ColumnStochastic : GraphFamily::DoublyStochastic;
}

LocalHyper effective_hyper(AlgorithmKind k, LocalHyper h) {
    switch (k) {
    case AlgorithmKind::DFedSGPSM:
    case AlgorithmKind::DFedSGPSMS:
        break;
    case AlgorithmKind::OSGP:
        h.rho = 0.0;
        h.alpha = 0.0;
        break;
    case AlgorithmKind::SGP:
    case AlgorithmKind::DPSGD:
        h.rho = 0.0;
        h.alpha = 0.0;
        h.local_iters = 1;
        h.local_epochs = 0;
        break;
    case AlgorithmKind::DFedAvg:
        h.rho = 0.0;
        h.alpha = 0.0;
        break;
    case AlgorithmKind::DFedAvgM:
        h.rho = 0.0;
        break;
    case AlgorithmKind::DFedSAM:
        h.alpha = 0.0;
        break;
    case AlgorithmKind::FedAvg:
        h.rho = 0.0;
        h.alpha = 0.0;
        break;
    }
    return h;
}

std::vector<ClientState> init_states(int n, const ParamVector& x0) {
    std::vector<ClientState> states(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        states[static_cast<std::size_t>(i)].x = x0;
        states[static_cast<std::size_t>(i)].w = 1.0;
        states[static_cast<std::size_t>(i)].client_id = i;
    }
    return states;
}

namespace {

// local training phase; touched[i] marks participants (all, for
// decentralized kinds)
std::vector<ParamVector> local_phase(const std::vector<ClientState>& states,
                                     const std::vector<std::unique_ptr<LocalObjective>>& objectives,
                                     const LocalHyper& hyper, const std::vector<char>& touched,
                                     int round, std::uint64_t seed, int threads) {
    const int n = static_cast<int>(states.size());
    std::vector<ParamVector> half(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const auto& st = states[static_cast<std::size_t>(i)];
        if (!touched[static_cast<std::size_t>(i)]) {
            half[static_cast<std::size_t>(i)] = st.x;
            return;
        }
        const auto& obj = *objectives[static_cast<std::size_t>(i)];
        const int iters = resolve_local_iters(hyper, obj.shard_size());
        MinibatchSampler sampler(obj.shard_size(), hyper.batch_size, seed, i);
        const long offset = static_cast<long>(round) * iters;
        half[static_cast<std::size_t>(i)] =
            local_round(obj, st.x, st.w, hyper, sampler, offset, nullptr);
    });
    return half;
}

RoundInvariants finish_round(std::vector<ClientState>& states,
                             const std::vector<ParamVector>& before_comm,
                             const std::vector<ParamVector>& after_x,
                             const std::vector<double>& after_w, int round) {
    const int n = static_cast<int>(states.size());
    const std::size_t dim = after_x.front().dim();

    RoundInvariants inv;
    inv.min_w = after_w[0];
    inv.max_w = after_w[0];
    double w_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w_sum += after_w[static_cast<std::size_t>(i)];
        inv.min_w = std::min(inv.min_w, after_w[static_cast<std::size_t>(i)]);
        inv.max_w = std::max(inv.max_w, after_w[static_cast<std::size_t>(i)]);
    }
    inv.w_sum_residual = std::abs(w_sum - static_cast<double>(n));

    // mass drift of the communication step, coordinate-wise
    ParamVector sum_before(dim), sum_after(dim);
    for (int i = 0; i < n; ++i) {
        axpy_inplace(1.0, before_comm[static_cast<std::size_t>(i)], sum_before);
        axpy_inplace(1.0, after_x[static_cast<std::size_t>(i)], sum_after);
    }
    double drift = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        drift = std::max(drift, std::abs(sum_after[k] - sum_before[k]));
    }
    inv.x_drift = drift;
    inv.sum_x_norm = l2_norm(sum_before);
    inv.x_drift_rel = drift / std::max(1.0, inv.sum_x_norm);

    if (inv.min_w < kPushSumWeightFloor) {
        throw ProtocolError("round " + std::to_string(round) + ": push-sum weight underflow, min w = " +
                            std::to_string(inv.min_w));
    }
    if (inv.w_sum_residual > 1e-9 * n) {
        throw ProtocolError("round " + std::to_string(round) + ": push-sum mass not conserved, |sum w - n| = " +
                            std::to_string(inv.w_sum_residual));
    }
    if (inv.x_drift_rel > 1e-9) {
        throw ProtocolError("round " + std::to_string(round) +
                            ": parameter mass drifted during communication, rel = " +
                            std::to_string(inv.x_drift_rel));
    }

    for (int i = 0; i < n; ++i) {
        auto& st = states[static_cast<std::size_t>(i)];
        st.x = after_x[static_cast<std::size_t>(i)];
        st.w = after_w[static_cast<std::size_t>(i)];
        if (!st.x.all_finite()) {
            throw ProtocolError("round " + std::to_string(round) + ": client " + std::to_string(i) +
                                " holds non-finite parameters");
        }
    }
    return inv;
}

} // namespace

RoundInvariants run_round(std::vector<ClientState>& states,
                          const std::vector<std::unique_ptr<LocalObjective>>& objectives,
                          AlgorithmKind kind, const DiGraphRound& graph, const LocalHyper& hyper_in,
                          int round, std::uint64_t seed, int threads, bool refresh_last_loss) {
    const int n = static_cast<int>(states.size());
    if (n == 0) throw ConfigError("run_round: no clients");
    if (objectives.size() != states.size()) {
        throw ConfigError("run_round: objectives/state count mismatch");
    }
    if (is_decentralized(kind)) {
        if (graph.size() != n) {
            throw ConfigError("run_round: graph size " + std::to_string(graph.size()) +
                              " != client count " + std::to_string(n));
        }
        if (required_family(kind) == GraphFamily::DoublyStochastic &&
            graph.family() != GraphFamily::DoublyStochastic) {
            throw ConfigError(std::string("run_round: ") + to_string(kind) +
                              " needs a doubly-stochastic symmetric topology");
        }
    }

    const LocalHyper hyper = effective_hyper(kind, hyper_in);

    // participants: everyone, except FedAvg's sampled cohort
    std::vector<char> touched(static_cast<std::size_t>(n), 1);
    std::vector<int> cohort;
    if (kind == AlgorithmKind::FedAvg) {
        const int m = std::max(1, static_cast<int>(std::lround(kFedAvgParticipation * n)));
        SeededRng rng(seed, StreamPurpose::ClientSample, 0, static_cast<std::uint64_t>(round));
        cohort = rng.sample_without_replacement(n, m);
        std::sort(cohort.begin(), cohort.end());
        std::fill(touched.begin(), touched.end(), 0);
        for (int i : cohort) touched[static_cast<std::size_t>(i)] = 1;
    }

    const std::vector<ParamVector> half =
        local_phase(states, objectives, hyper, touched, round, seed, threads);

    std::vector<ParamVector> next_x;
    std::vector<double> next_w(static_cast<std::size_t>(n), 1.0);

    if (kind == AlgorithmKind::FedAvg) {
        // server mean over the cohort, broadcast back to every client
        ParamVector global(half.front().dim(), 0.0);
        for (int i : cohort) axpy_inplace(1.0, half[static_cast<std::size_t>(i)], global);
        scale_inplace(1.0 / static_cast<double>(cohort.size()), global);
        next_x.assign(static_cast<std::size_t>(n), global);
        // broadcast replaces mass, so drift is measured against the result
        return finish_round(states, next_x, next_x, next_w, round);
    }

    // gossip: every sender scales its payload by its own out-weight, then
    // receivers sum what arrives (in sender order, for determinism)
    std::vector<std::vector<Message>> inbox(static_cast<std::size_t>(n));
    for (int sender = 0; sender < n; ++sender) {
        for (int receiver : graph.out_neighbors(sender)) {
            Message msg;
            msg.from = sender;
            msg.to = receiver;
            const double p = graph.weight(receiver, sender);
            msg.payload_x = half[static_cast<std::size_t>(sender)];
            scale_inplace(p, msg.payload_x);
            msg.payload_w = p * states[static_cast<std::size_t>(sender)].w;
            inbox[static_cast<std::size_t>(receiver)].push_back(std::move(msg));
        }
    }

    next_x.assign(static_cast<std::size_t>(n), ParamVector(half.front().dim(), 0.0));
    const bool push_sum = uses_push_sum(kind);
    for (int receiver = 0; receiver < n; ++receiver) {
        auto& box = inbox[static_cast<std::size_t>(receiver)];
        std::sort(box.begin(), box.end(),
                  [](const Message& a, const Message& b) { return a.from < b.from; });
        double w_acc = 0.0;
        for (const Message& msg : box) {
            axpy_inplace(1.0, msg.payload_x, next_x[static_cast<std::size_t>(receiver)]);
            w_acc += msg.payload_w;
        }
        // symmetric baselines never leave w = 1
        next_w[static_cast<std::size_t>(receiver)] = push_sum ? w_acc : 1.0;
    }

    RoundInvariants inv = finish_round(states, half, next_x, next_w, round);

    if (refresh_last_loss) {
        parallel_for(n, threads, [&](int i) {
            auto& st = states[static_cast<std::size_t>(i)];
            const ParamVector z = debias(st.x, st.w);
            st.last_loss = objectives[static_cast<std::size_t>(i)]->evaluate_full(z);
        });
    }
    return inv;
}

double consensus_error(std::span<const ClientState> states) {
    const ParamVector xbar = mean_x(states);
    double acc = 0.0;
    for (const auto& st : states) {
        const ParamVector z = debias(st.x, st.w);
        const double d = l2_distance(z, xbar);
        acc += d * d;
    }
    return acc / static_cast<double>(states.size());
}

ParamVector mean_x(std::span<const ClientState> states) {
    ParamVector acc(states.front().x.dim(), 0.0);
    for (const auto& st : states) axpy_inplace(1.0, st.x, acc);
    scale_inplace(1.0 / static_cast<double>(states.size()), acc);
    return acc;
}

} // namespace dflsim
