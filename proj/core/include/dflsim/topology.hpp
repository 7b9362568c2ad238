#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dflsim/rng.hpp"

namespace dflsim {

enum class GraphFamily { ColumnStochastic, DoublyStochastic };

// One communication round of the time-varying digraph. weight(i, j) is
// p_{i,j}, the coefficient receiver i applies to sender j's payload; column
// j holds sender j's outgoing weights and sums to 1.
//
// Column-stochastic rounds use the uniform rule p_{j,i} = 1/|N_i^out| for
// j in N_i^out. Doubly-stochastic rounds carry explicit symmetric weights.
class DiGraphRound {
public:
    // uniform out-weights derived from out-neighbor sets (self-loops added)
    DiGraphRound(int n, std::vector<std::vector<int>> out_neighbors);
    // explicit weights (dense n*n, row-major receiver x sender)
    DiGraphRound(int n, std::vector<std::vector<int>> out_neighbors, std::vector<double> weights,
                 GraphFamily family);

    int size() const { return n_; }
    GraphFamily family() const { return family_; }
    const std::vector<int>& out_neighbors(int i) const {
        return out_[static_cast<std::size_t>(i)];
    }
    const std::vector<int>& in_neighbors(int i) const { return in_[static_cast<std::size_t>(i)]; }
    int out_degree(int i) const { return static_cast<int>(out_[static_cast<std::size_t>(i)].size()); }
    double weight(int receiver, int sender) const {
        return weights_[static_cast<std::size_t>(receiver) * n_ + sender];
    }

    double max_column_residual() const; // max_i |sum_j p_{j,i} - 1|
    double max_row_residual() const;    // for doubly-stochastic checks
    bool is_symmetric() const;          // edge sets and weights

private:
    void build_in_neighbors();

    int n_ = 0;
    GraphFamily family_ = GraphFamily::ColumnStochastic;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    std::vector<double> weights_;
};

enum class TopologyGenerator {
    DirectedRing,
    DirectedKOut,
    Complete,
    SymmetricDoublyStochastic,
};

const char* to_string(TopologyGenerator g);
TopologyGenerator topology_generator_from_string(const std::string& name);

struct TopologyOptions {
    TopologyGenerator generator = TopologyGenerator::DirectedKOut;
    bool time_varying = true;
    int k_out = 0;    // 0 = default_k_out(n)
    int window_b = 5; // connectivity window B
};

// 10 neighbors at n = 100, scaled down for smaller deployments.
int default_k_out(int n);

// Round-t graph. Static schedules reuse the t = 0 draw; time-varying ones
// re-draw every round from the (seed, round) stream.
DiGraphRound gen_round(const TopologyOptions& opts, int n, int t, std::uint64_t seed);

class TopologySchedule {
public:
    TopologySchedule(TopologyOptions opts, int n, std::uint64_t seed);
    DiGraphRound round(int t) const;
    const TopologyOptions& options() const { return opts_; }
    int n_clients() const { return n_; }

private:
    TopologyOptions opts_;
    int n_;
    std::uint64_t seed_;
};

struct ConnectivityReport {
    bool ok = true;
    int failing_window = -1; // start index of the first failing window
};

// True iff every window of window_b consecutive rounds has a strongly
// connected union graph (single SCC).
ConnectivityReport check_b_connectivity(std::span<const DiGraphRound> rounds, int window_b);

// Metropolis-Hastings weights over a symmetric adjacency with self-loops:
// p_{ij} = 1/(1 + max(deg_i, deg_j)) on edges, diagonal absorbs the rest.
// Rows and columns both sum to 1.
DiGraphRound doubly_stochastic(const std::vector<std::vector<int>>& undirected_adjacency);

// Loss-aware selection distribution for client i:
//   p(j) = exp(|f_i - f_j|) / sum_k exp(|f_i - f_k|)
// computed with a max shift so large loss gaps cannot overflow.
std::vector<double> neighbor_select_probs(std::span<const double> f_values, int i);

// k_out distinct out-neighbors != i, drawn without replacement from probs.
std::vector<int> sample_out_neighbors(std::span<const double> probs, int i, int k_out,
                                      SeededRng& rng);

// Full round graph for loss-aware neighbor selection (self-loops included).
DiGraphRound strategy_round(std::span<const double> f_values, int k_out, int t, std::uint64_t seed);

} // namespace dflsim
