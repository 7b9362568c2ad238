#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dflsim/local_optim.hpp"
#include "dflsim/topology.hpp"

namespace dflsim {

// Every baseline is the same engine with some hyper-parameters pinned and a
// mixing family selected; see effective_hyper() and required_family().
enum class AlgorithmKind {
    DFedSGPSM,  // push-sum + SAM + local momentum
    DFedSGPSMS, // DFedSGPSM with loss-aware out-neighbor selection
    OSGP,       // push-sum, plain SGD, multiple local steps
    SGP,        // OSGP with a single local step
    DPSGD,      // one SGD step + doubly-stochastic mixing
    DFedAvg,    // local SGD + doubly-stochastic mixing
    DFedAvgM,   // DFedAvg with local momentum
    DFedSAM,    // DFedAvg with the two-point SAM gradient
    FedAvg,     // server mean over a sampled cohort
};

const char* to_string(AlgorithmKind k);
AlgorithmKind algorithm_from_string(const std::string& name);

bool uses_push_sum(AlgorithmKind k);
bool uses_strategy_selection(AlgorithmKind k);
bool is_decentralized(AlgorithmKind k);
GraphFamily required_family(AlgorithmKind k); // meaningless for FedAvg

// Pins the hyper-parameters that define each baseline (rho, alpha, K). The
// reductions between algorithms are bit-exact because the pinned runs share
// this single code path.
LocalHyper effective_hyper(AlgorithmKind k, LocalHyper h);

struct ClientState {
    ParamVector x;
    double w = 1.0;
    double last_loss = 0.0; // full-shard loss snapshot for neighbor selection
    int client_id = 0;
};

// One directed exchange. Payloads are pre-scaled by the sender's out-weight,
// so a receiver only sums what arrives.
struct Message {
    int from = 0;
    int to = 0;
    ParamVector payload_x;
    double payload_w = 0.0;
};

struct RoundInvariants {
    double w_sum_residual = 0.0; // |sum_i w_i - n| after aggregation
    double x_drift = 0.0;        // max_k |sum_i x_i[k] change over the comm step|
    double x_drift_rel = 0.0;    // x_drift / max(1, ||sum_i x_i before||)
    double sum_x_norm = 0.0;     // ||sum_i x_i|| entering the comm step
    double min_w = 1.0;
    double max_w = 1.0;
};

// Below this the de-biasing ratio is no longer trustworthy; the round aborts.
inline constexpr double kPushSumWeightFloor = 1e-9;
// FedAvg cohort fraction.
inline constexpr double kFedAvgParticipation = 0.1;

// Advances all clients by one communication round in place. `threads`
// parallelizes the local phase; results are identical for any thread count.
// Throws ProtocolError on invariant breaches (weight underflow, mass drift)
// and ConfigError when the graph family does not match the algorithm.
RoundInvariants run_round(std::vector<ClientState>& states,
                          const std::vector<std::unique_ptr<LocalObjective>>& objectives,
                          AlgorithmKind kind, const DiGraphRound& graph, const LocalHyper& hyper,
                          int round, std::uint64_t seed, int threads = 1,
                          bool refresh_last_loss = false);

// (1/n) sum_i ||x_i/w_i - mean(x)||^2
double consensus_error(std::span<const ClientState> states);

ParamVector mean_x(std::span<const ClientState> states);

std::vector<ClientState> init_states(int n, const ParamVector& x0);

} // namespace dflsim
