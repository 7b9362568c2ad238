#include "dflsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dflsim/errors.hpp"

#include "json.hpp"

namespace dflsim {

using nlohmann::ordered_json;

const char* to_string(ModelKind k) {
    switch (k) {
    case ModelKind::Quadratic: return "quadratic";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Mlp: return "mlp";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "quadratic") return ModelKind::Quadratic;
    if (name == "logistic" || name == "logistic-regression") return ModelKind::Logistic;
    if (name == "mlp" || name == "mlp-1hidden") return ModelKind::Mlp;
    throw ConfigError("unknown model kind: " + name);
}

void ExperimentConfig::validate() const {
    if (n_clients < 1) throw ConfigError("config: n_clients must be >= 1");
    if (rounds < 0) throw ConfigError("config: rounds must be >= 0");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    if (!(optim.eta_l0 > 0.0)) throw ConfigError("config: eta_l0 must be positive");
    if (!(optim.decay > 0.0) || optim.decay > 1.0) {
        throw ConfigError("config: decay must lie in (0, 1]");
    }
    if (optim.rho < 0.0) throw ConfigError("config: rho must be >= 0");
    if (optim.alpha < 0.0 || optim.alpha >= 1.0) throw ConfigError("config: alpha must lie in [0, 1)");
    if (optim.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
    if ((optim.local_iters > 0) == (optim.local_epochs > 0)) {
        throw ConfigError("config: set exactly one of local_iters / local_epochs");
    }
    if (data.partition == PartitionKind::Dirichlet && !(data.dirichlet_alpha > 0.0)) {
        throw ConfigError("config: dirichlet_alpha must be positive");
    }
    if (data.source == DataSource::Idx &&
        (data.train_images.empty() || data.train_labels.empty())) {
        throw ConfigError("config: idx data source needs train_images and train_labels paths");
    }
    if (model.kind == ModelKind::Mlp && model.hidden < 1) {
        throw ConfigError("config: mlp hidden width must be >= 1");
    }
    if (model.kind == ModelKind::Quadratic && model.quadratic_dim < 1) {
        throw ConfigError("config: quadratic_dim must be >= 1");
    }
}

double eta_at_round(const OptimConfig& o, int t) {
    return o.eta_l0 * std::pow(o.decay, t);
}

namespace {

template <typename T>
void maybe(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid json: ") + e.what());
    }

    ExperimentConfig cfg;
    if (j.contains("algorithm")) cfg.algorithm = algorithm_from_string(j.at("algorithm"));
    maybe(j, "n_clients", cfg.n_clients);
    maybe(j, "rounds", cfg.rounds);
    maybe(j, "seed", cfg.seed);
    maybe(j, "threads", cfg.threads);
    maybe(j, "out", cfg.out);

    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        if (t.contains("generator")) {
            cfg.topology.generator = topology_generator_from_string(t.at("generator"));
        }
        maybe(t, "time_varying", cfg.topology.time_varying);
        maybe(t, "k_out", cfg.topology.k_out);
        maybe(t, "window_b", cfg.topology.window_b);
    }
    if (j.contains("optim")) {
        const auto& o = j.at("optim");
        maybe(o, "eta_l0", cfg.optim.eta_l0);
        maybe(o, "decay", cfg.optim.decay);
        maybe(o, "rho", cfg.optim.rho);
        maybe(o, "alpha", cfg.optim.alpha);
        maybe(o, "local_iters", cfg.optim.local_iters);
        maybe(o, "local_epochs", cfg.optim.local_epochs);
        maybe(o, "batch_size", cfg.optim.batch_size);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.contains("kind")) cfg.model.kind = model_kind_from_string(m.at("kind"));
        maybe(m, "hidden", cfg.model.hidden);
        maybe(m, "quadratic_dim", cfg.model.quadratic_dim);
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        if (d.contains("source")) {
            const std::string s = d.at("source");
            if (s == "synthetic") cfg.data.source = DataSource::Synthetic;
            else if (s == "idx") cfg.data.source = DataSource::Idx;
            else throw ConfigError("config: unknown data source " + s);
        }
        maybe(d, "classes", cfg.data.classes);
        maybe(d, "per_class", cfg.data.per_class);
        maybe(d, "dim", cfg.data.dim);
        maybe(d, "sep", cfg.data.sep);
        maybe(d, "train_images", cfg.data.train_images);
        maybe(d, "train_labels", cfg.data.train_labels);
        maybe(d, "test_images", cfg.data.test_images);
        maybe(d, "test_labels", cfg.data.test_labels);
        maybe(d, "limit", cfg.data.limit);
        maybe(d, "test_limit", cfg.data.test_limit);
        if (d.contains("partition")) {
            const std::string p = d.at("partition");
            if (p == "dirichlet") cfg.data.partition = PartitionKind::Dirichlet;
            else if (p == "iid") cfg.data.partition = PartitionKind::Iid;
            else throw ConfigError("config: unknown partition kind " + p);
        }
        maybe(d, "dirichlet_alpha", cfg.data.dirichlet_alpha);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ConfigError("config: cannot open " + json_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string to_json_text(const ExperimentConfig& cfg) {
    ordered_json j;
    j["algorithm"] = to_string(cfg.algorithm);
    j["n_clients"] = cfg.n_clients;
    j["rounds"] = cfg.rounds;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["topology"] = {
        {"generator", to_string(cfg.topology.generator)},
        {"time_varying", cfg.topology.time_varying},
        {"k_out", cfg.topology.k_out},
        {"window_b", cfg.topology.window_b},
    };
    j["optim"] = {
        {"eta_l0", cfg.optim.eta_l0},
        {"decay", cfg.optim.decay},
        {"rho", cfg.optim.rho},
        {"alpha", cfg.optim.alpha},
        {"local_iters", cfg.optim.local_iters},
        {"local_epochs", cfg.optim.local_epochs},
        {"batch_size", cfg.optim.batch_size},
    };
    j["model"] = {
        {"kind", to_string(cfg.model.kind)},
        {"hidden", cfg.model.hidden},
        {"quadratic_dim", cfg.model.quadratic_dim},
    };
    j["data"] = {
        {"source", cfg.data.source == DataSource::Synthetic ? "synthetic" : "idx"},
        {"classes", cfg.data.classes},
        {"per_class", cfg.data.per_class},
        {"dim", cfg.data.dim},
        {"sep", cfg.data.sep},
        {"train_images", cfg.data.train_images},
        {"train_labels", cfg.data.train_labels},
        {"test_images", cfg.data.test_images},
        {"test_labels", cfg.data.test_labels},
        {"limit", cfg.data.limit},
        {"test_limit", cfg.data.test_limit},
        {"partition", cfg.data.partition == PartitionKind::Dirichlet ? "dirichlet" : "iid"},
        {"dirichlet_alpha", cfg.data.dirichlet_alpha},
    };
    j["out"] = cfg.out;
    return j.dump(2);
}

} // namespace dflsim
