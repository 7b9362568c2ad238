#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dflsim/protocol.hpp"
#include "dflsim/topology.hpp"

namespace dflsim {

enum class ModelKind { Quadratic, Logistic, Mlp };
enum class DataSource { Synthetic, Idx };
enum class PartitionKind { Dirichlet, Iid };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& name);

struct DataConfig {
    DataSource source = DataSource::Synthetic;
    // synthetic blobs
    int classes = 4;
    int per_class = 100;
    int dim = 8;
    double sep = 3.0;
    // idx files
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    int limit = 0;      // 0 = all available
    int test_limit = 0; // 0 = all available
    // shard assignment
    PartitionKind partition = PartitionKind::Dirichlet;
    double dirichlet_alpha = 0.3;
};

struct OptimConfig {
    double eta_l0 = 0.1;
    double decay = 0.998; // per-round geometric decay
    double rho = 0.0;
    double alpha = 0.0;
    int local_iters = 0;  // exactly one of local_iters / local_epochs is set
    int local_epochs = 5;
    int batch_size = 32;
};

struct ModelConfig {
    ModelKind kind = ModelKind::Logistic;
    int hidden = 32;        // mlp only
    int quadratic_dim = 4;  // quadratic only
};

struct ExperimentConfig {
    AlgorithmKind algorithm = AlgorithmKind::DFedSGPSM;
    int n_clients = 16;
    int rounds = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    TopologyOptions topology;
    OptimConfig optim;
    ModelConfig model;
    DataConfig data;
    std::string out; // output directory; empty = no files

    void validate() const; // throws ConfigError
};

double eta_at_round(const OptimConfig& o, int t);

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& json_path);
std::string to_json_text(const ExperimentConfig& cfg);

} // namespace dflsim
