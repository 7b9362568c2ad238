#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dflsim/dataset.hpp"
#include "dflsim/protocol.hpp"

namespace dflsim {

// One row of the metrics CSV. wall_ms is kept out of metrics.csv (it would
// break rerun byte-identity) and lands in timing.csv instead.
struct RoundMetrics {
    int round = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double grad_norm_sq = 0.0;
    double consensus_err = 0.0;
    double min_w = 1.0;
    double max_w = 1.0;
    std::int64_t wall_ms = 0;
};

// Append-only CSV sink. Header on first append; rounds must arrive as
// 0, 1, 2, ... with no gaps. Every row is flushed.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& csv_path);
    void append(const RoundMetrics& m);
    static const char* header();

private:
    std::ofstream out_;
    int last_round_ = -1;
};

// Row formatted at 17 significant digits, enough for a lossless
// double round-trip.
std::string format_metrics_row(const RoundMetrics& m);

std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& csv_path);

struct RunManifest {
    std::string config_json; // full resolved config
    std::uint64_t seed = 0;
    std::string code_version;
    std::string started_at;
};

inline constexpr const char* kCodeVersion = "dflsim 0.1.0";

// Writes manifest.json into the run directory; refuses to overwrite an
// existing manifest so a directory never mixes two runs.
void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m);

struct GlobalEval {
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double grad_norm_sq = 0.0;
};

// Evaluates the average model x-bar = mean of x_i (deliberately not the
// de-biased z_i): global train loss and squared gradient norm over full
// shards, accuracy over the held-out set. Invariant under client order.
GlobalEval evaluate_global(std::span<const ClientState> states,
                           const std::vector<std::unique_ptr<LocalObjective>>& objectives,
                           const Dataset* test_set);

} // namespace dflsim
