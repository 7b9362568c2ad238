#include "dflsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dflsim/errors.hpp"

namespace dflsim {
namespace {

std::vector<std::vector<int>> with_self_loops(int n, std::vector<std::vector<int>> out) {
    out.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& nb = out[static_cast<std::size_t>(i)];
        if (std::find(nb.begin(), nb.end(), i) == nb.end()) nb.push_back(i);
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return out;
}

// iterative Tarjan SCC count on an adjacency list
int count_sccs(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    int next_index = 0;
    int sccs = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] != -1) continue;
        call.push_back({root, 0});
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = true;

        while (!call.empty()) {
            Frame& f = call.back();
            const auto& edges = adj[static_cast<std::size_t>(f.v)];
            if (f.child < edges.size()) {
                const int w = edges[f.child++];
                if (index[static_cast<std::size_t>(w)] == -1) {
                    index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] =
                        next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<std::size_t>(w)] = true;
                    call.push_back({w, 0});
                } else if (on_stack[static_cast<std::size_t>(w)]) {
                    low[static_cast<std::size_t>(f.v)] =
                        std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
                }
            } else {
                if (low[static_cast<std::size_t>(f.v)] == index[static_cast<std::size_t>(f.v)]) {
                    ++sccs;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<std::size_t>(w)] = false;
                    } while (w != f.v);
                }
                const int v = f.v;
                call.pop_back();
                if (!call.empty()) {
                    low[static_cast<std::size_t>(call.back().v)] =
                        std::min(low[static_cast<std::size_t>(call.back().v)],
                                 low[static_cast<std::size_t>(v)]);
                }
            }
        }
    }
    return sccs;
}

} // namespace

DiGraphRound::DiGraphRound(int n, std::vector<std::vector<int>> out_neighbors)
    : n_(n), family_(GraphFamily::ColumnStochastic),
      out_(with_self_loops(n, std::move(out_neighbors))) {
    weights_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int sender = 0; sender < n_; ++sender) {
        const auto& nb = out_[static_cast<std::size_t>(sender)];
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int receiver : nb) {
            weights_[static_cast<std::size_t>(receiver) * n_ + sender] = w;
        }
    }
    build_in_neighbors();
}

DiGraphRound::DiGraphRound(int n, std::vector<std::vector<int>> out_neighbors,
                           std::vector<double> weights, GraphFamily family)
    : n_(n), family_(family), out_(with_self_loops(n, std::move(out_neighbors))),
      weights_(std::move(weights)) {
    if (weights_.size() != static_cast<std::size_t>(n_) * n_) {
        throw DimMismatchError("DiGraphRound: weight matrix size " +
                               std::to_string(weights_.size()) + " vs n*n " +
                               std::to_string(static_cast<std::size_t>(n_) * n_));
    }
    build_in_neighbors();
}

void DiGraphRound::build_in_neighbors() {
    in_.assign(static_cast<std::size_t>(n_), {});
    for (int sender = 0; sender < n_; ++sender) {
        for (int receiver : out_[static_cast<std::size_t>(sender)]) {
            in_[static_cast<std::size_t>(receiver)].push_back(sender);
        }
    }
    for (auto& nb : in_) std::sort(nb.begin(), nb.end());
}

double DiGraphRound::max_column_residual() const {
    double worst = 0.0;
    for (int sender = 0; sender < n_; ++sender) {
        double sum = 0.0;
        for (int receiver = 0; receiver < n_; ++receiver) {
            sum += weight(receiver, sender);
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

double DiGraphRound::max_row_residual() const {
    double worst = 0.0;
    for (int receiver = 0; receiver < n_; ++receiver) {
        double sum = 0.0;
        for (int sender = 0; sender < n_; ++sender) {
            sum += weight(receiver, sender);
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

bool DiGraphRound::is_symmetric() const {
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
            if (weight(i, j) != weight(j, i)) return false;
        }
    }
    return true;
}

const char* to_string(TopologyGenerator g) {
    switch (g) {
    case TopologyGenerator::DirectedRing: return "directed-ring";
    case TopologyGenerator::DirectedKOut: return "directed-kout";
    case TopologyGenerator::Complete: return "complete";
    case TopologyGenerator::SymmetricDoublyStochastic: return "symmetric";
    }
    return "?";
}

TopologyGenerator topology_generator_from_string(const std::string& name) {
    if (name == "directed-ring" || name == "ring") return TopologyGenerator::DirectedRing;
    if (name == "directed-kout" || name == "kout" || name == "directed-erdos-renyi")
        return TopologyGenerator::DirectedKOut;
    if (name == "complete") return TopologyGenerator::Complete;
    if (name == "symmetric" || name == "symmetric-doubly-stochastic")
        return TopologyGenerator::SymmetricDoublyStochastic;
    throw ConfigError("unknown topology generator: " + name);
}

int default_k_out(int n) {
    return std::max(1, n / 10);
}

DiGraphRound gen_round(const TopologyOptions& opts, int n, int t, std::uint64_t seed) {
    if (n < 1) throw ConfigError("gen_round: need at least one client");
    const int k = opts.k_out > 0 ? opts.k_out : default_k_out(n);
    if (n > 1 && (k < 1 || k > n - 1)) {
        throw ConfigError("gen_round: k_out " + std::to_string(k) + " outside [1, " +
                          std::to_string(n - 1) + "]");
    }
    const int draw_t = opts.time_varying ? t : 0;

    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    switch (opts.generator) {
    case TopologyGenerator::DirectedRing:
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {i, (i + 1) % n};
        return DiGraphRound(n, std::move(out));
    case TopologyGenerator::Complete:
        for (int i = 0; i < n; ++i) {
            auto& nb = out[static_cast<std::size_t>(i)];
            nb.resize(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) nb[static_cast<std::size_t>(j)] = j;
        }
        return DiGraphRound(n, std::move(out));
    case TopologyGenerator::DirectedKOut: {
        for (int i = 0; i < n; ++i) {
            SeededRng rng(seed, StreamPurpose::Topology, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(draw_t));
            auto picks = n > 1 ? rng.sample_without_replacement(n, k, {}, i) : std::vector<int>{};
            picks.push_back(i);
            out[static_cast<std::size_t>(i)] = std::move(picks);
        }
        return DiGraphRound(n, std::move(out));
    }
    case TopologyGenerator::SymmetricDoublyStochastic: {
        // union of per-node k draws, symmetrized
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            SeededRng rng(seed, StreamPurpose::Topology, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(draw_t));
            if (n > 1) {
                for (int j : rng.sample_without_replacement(n, k, {}, i)) {
                    adj[static_cast<std::size_t>(i)].push_back(j);
                    adj[static_cast<std::size_t>(j)].push_back(i);
                }
            }
        }
        return doubly_stochastic(with_self_loops(n, std::move(adj)));
    }
    }
    throw ConfigError("gen_round: unhandled generator");
}

TopologySchedule::TopologySchedule(TopologyOptions opts, int n, std::uint64_t seed)
    : opts_(opts), n_(n), seed_(seed) {}

DiGraphRound TopologySchedule::round(int t) const {
    return gen_round(opts_, n_, t, seed_);
}

ConnectivityReport check_b_connectivity(std::span<const DiGraphRound> rounds, int window_b) {
    if (window_b < 1) throw ConfigError("check_b_connectivity: window must be >= 1");
    if (static_cast<int>(rounds.size()) < window_b) {
        throw ConfigError("check_b_connectivity: need at least " + std::to_string(window_b) +
                          " rounds, got " + std::to_string(rounds.size()));
    }
    const int n = rounds.front().size();
    for (std::size_t start = 0; start + window_b <= rounds.size(); ++start) {
        std::vector<std::vector<int>> union_adj(static_cast<std::size_t>(n));
        for (int w = 0; w < window_b; ++w) {
            const auto& g = rounds[start + static_cast<std::size_t>(w)];
            for (int i = 0; i < n; ++i) {
                for (int j : g.out_neighbors(i)) union_adj[static_cast<std::size_t>(i)].push_back(j);
            }
        }
        for (auto& nb : union_adj) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        }
        if (count_sccs(union_adj) != 1) {
            return {false, static_cast<int>(start)};
        }
    }
    return {true, -1};
}

DiGraphRound doubly_stochastic(const std::vector<std::vector<int>>& undirected_adjacency) {
    const int n = static_cast<int>(undirected_adjacency.size());
    auto adj = with_self_loops(n, undirected_adjacency);
    for (int i = 0; i < n; ++i) {
        for (int j : adj[static_cast<std::size_t>(i)]) {
            const auto& back = adj[static_cast<std::size_t>(j)];
            if (std::find(back.begin(), back.end(), i) == back.end()) {
                throw ConfigError("doubly_stochastic: adjacency is not symmetric (edge " +
                                  std::to_string(i) + "->" + std::to_string(j) + ")");
            }
        }
    }

    std::vector<int> degree(static_cast<std::size_t>(n)); // neighbors excluding self
    for (int i = 0; i < n; ++i) {
        degree[static_cast<std::size_t>(i)] =
            static_cast<int>(adj[static_cast<std::size_t>(i)].size()) - 1;
    }

    std::vector<double> weights(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double off_diag = 0.0;
        for (int j : adj[static_cast<std::size_t>(i)]) {
            if (j == i) continue;
            const double w = 1.0 / (1.0 + std::max(degree[static_cast<std::size_t>(i)],
                                                   degree[static_cast<std::size_t>(j)]));
            weights[static_cast<std::size_t>(i) * n + j] = w;
            off_diag += w;
        }
        weights[static_cast<std::size_t>(i) * n + i] = 1.0 - off_diag;
    }
    return DiGraphRound(n, std::move(adj), std::move(weights), GraphFamily::DoublyStochastic);
}

std::vector<double> neighbor_select_probs(std::span<const double> f_values, int i) {
    const int n = static_cast<int>(f_values.size());
    for (double f : f_values) {
        if (!std::isfinite(f)) throw SimError("neighbor_select_probs: non-finite loss value");
    }
    const double fi = f_values[static_cast<std::size_t>(i)];
    double max_gap = 0.0;
    for (int j = 0; j < n; ++j) {
        max_gap = std::max(max_gap, std::abs(fi - f_values[static_cast<std::size_t>(j)]));
    }
    std::vector<double> probs(static_cast<std::size_t>(n));
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
        const double e = std::exp(std::abs(fi - f_values[static_cast<std::size_t>(j)]) - max_gap);
        probs[static_cast<std::size_t>(j)] = e;
        z += e;
    }
    for (double& p : probs) p /= z;
    return probs;
}

std::vector<int> sample_out_neighbors(std::span<const double> probs, int i, int k_out,
                                      SeededRng& rng) {
    const int n = static_cast<int>(probs.size());
    if (k_out > n - 1) {
        throw SimError("sample_out_neighbors: k_out " + std::to_string(k_out) +
                       " exceeds support size " + std::to_string(n - 1));
    }
    return rng.sample_without_replacement(n, k_out, probs, i);
}

DiGraphRound strategy_round(std::span<const double> f_values, int k_out, int t,
                            std::uint64_t seed) {
    const int n = static_cast<int>(f_values.size());
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto probs = neighbor_select_probs(f_values, i);
        SeededRng rng(seed, StreamPurpose::NeighborSelect, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(t));
        auto picks = sample_out_neighbors(probs, i, k_out, rng);
        picks.push_back(i);
        out[static_cast<std::size_t>(i)] = std::move(picks);
    }
    return DiGraphRound(n, std::move(out));
}

} // namespace dflsim
