#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dflsim/config.hpp"
#include "dflsim/metrics.hpp"
#include "dflsim/partition.hpp"
#include "dflsim/protocol.hpp"

namespace dflsim {

// Everything a round loop needs: data, shards, per-client objectives and
// the broadcast initial model.
struct ExperimentSetup {
    std::shared_ptr<const Dataset> train; // null for quadratic models
    std::shared_ptr<const Dataset> test;  // null when no held-out split exists
    Partition partition;
    std::vector<std::unique_ptr<LocalObjective>> objectives;
    ParamVector x0;
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<RoundMetrics> metrics;
    std::vector<ClientState> final_states;
    ParamVector final_mean_x;
    int b_connectivity_violations = 0;
};

using RoundObserver = std::function<void(const RoundMetrics&, const RoundInvariants&)>;

// Runs cfg.rounds communication rounds. Metrics row 0 is the shared
// initialization; row t is the state after round t. With an output
// directory set, writes manifest.json (before round 0), metrics.csv and
// timing.csv. Identical configs and seeds produce byte-identical
// metrics.csv files for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                const RoundObserver& observer = nullptr);

} // namespace dflsim
