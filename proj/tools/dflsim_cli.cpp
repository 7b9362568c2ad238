// Command-line front end: run experiments, sweep one hyper-parameter,
// check topology connectivity, and run the oracle verification suite.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dflsim/errors.hpp"
#include "dflsim/experiment.hpp"
#include "dflsim/oracles.hpp"

namespace {

struct RunOverrides {
    std::string config_path;
    std::optional<std::string> algorithm;
    std::optional<std::uint64_t> seed;
    std::optional<int> rounds;
    std::optional<int> n_clients;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> data_source;
    std::optional<double> dirichlet_alpha;
    std::optional<int> limit;
    std::optional<double> rho;
    std::optional<double> alpha;
    std::optional<double> eta_l0;
    std::optional<int> k_out;
};

dflsim::ExperimentConfig resolve_config(const RunOverrides& ov) {
    dflsim::ExperimentConfig cfg = ov.config_path.empty()
                                       ? dflsim::ExperimentConfig{}
                                       : dflsim::load_config(ov.config_path);
    if (ov.algorithm) cfg.algorithm = dflsim::algorithm_from_string(*ov.algorithm);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.rounds) cfg.rounds = *ov.rounds;
    if (ov.n_clients) cfg.n_clients = *ov.n_clients;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.out) cfg.out = *ov.out;
    if (ov.data_source) {
        if (*ov.data_source == "synthetic") cfg.data.source = dflsim::DataSource::Synthetic;
        else if (*ov.data_source == "idx") cfg.data.source = dflsim::DataSource::Idx;
        else throw dflsim::ConfigError("--data must be synthetic or idx");
    }
    if (ov.dirichlet_alpha) cfg.data.dirichlet_alpha = *ov.dirichlet_alpha;
    if (ov.limit) cfg.data.limit = *ov.limit;
    if (ov.rho) cfg.optim.rho = *ov.rho;
    if (ov.alpha) cfg.optim.alpha = *ov.alpha;
    if (ov.eta_l0) cfg.optim.eta_l0 = *ov.eta_l0;
    if (ov.k_out) cfg.topology.k_out = *ov.k_out;
    cfg.validate();
    return cfg;
}

void add_run_options(CLI::App* cmd, RunOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "experiment config (json)");
    cmd->add_option("--algorithm", ov.algorithm,
                    "DFedSGPSM | DFedSGPSM-S | OSGP | SGP | D-PSGD | DFedAvg | DFedAvgM | DFedSAM | FedAvg");
    cmd->add_option("--seed", ov.seed, "experiment seed");
    cmd->add_option("--rounds", ov.rounds, "communication rounds");
    cmd->add_option("--clients", ov.n_clients, "number of clients");
    cmd->add_option("--threads", ov.threads, "worker threads for the local phase");
    cmd->add_option("--out", ov.out, "output directory (manifest + csv)");
    cmd->add_option("--data", ov.data_source, "synthetic | idx");
    cmd->add_option("--alpha", ov.dirichlet_alpha, "Dirichlet concentration for the partition");
    cmd->add_option("--limit", ov.limit, "sample cap for idx data");
    cmd->add_option("--rho", ov.rho, "SAM perturbation radius");
    cmd->add_option("--momentum", ov.alpha, "momentum coefficient");
    cmd->add_option("--eta", ov.eta_l0, "initial local learning rate");
    cmd->add_option("--k-out", ov.k_out, "out-neighbors per client");
}

int do_run(const RunOverrides& ov) {
    const auto cfg = resolve_config(ov);
    std::optional<std::filesystem::path> out_dir;
    if (!cfg.out.empty()) out_dir = cfg.out;

    const auto result = dflsim::run_experiment(cfg, out_dir);
    const auto& last = result.metrics.back();
    std::cout << dflsim::to_string(cfg.algorithm) << " seed=" << cfg.seed
              << " rounds=" << cfg.rounds << "  final: loss=" << last.train_loss
              << " acc=" << last.test_accuracy << " grad2=" << last.grad_norm_sq
              << " consensus=" << last.consensus_err << '\n';
    if (result.b_connectivity_violations > 0) {
        std::cout << "note: " << result.b_connectivity_violations
                  << " window(s) violated B-bounded strong connectivity\n";
    }
    if (out_dir) std::cout << "wrote " << (*out_dir / "metrics.csv").string() << '\n';
    return 0;
}

int do_sweep(const RunOverrides& ov, const std::string& param, const std::string& values_csv) {
    std::vector<double> values;
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) values.push_back(std::stod(tok));
    }
    if (values.empty()) throw dflsim::ConfigError("sweep: no values given");

    const auto base = resolve_config(ov);
    std::cout << "sweep over " << param << " (" << values.size() << " points)\n";
    for (double v : values) {
        dflsim::ExperimentConfig cfg = base;
        if (param == "rho") cfg.optim.rho = v;
        else if (param == "alpha" || param == "momentum") cfg.optim.alpha = v;
        else if (param == "eta_l0" || param == "eta") cfg.optim.eta_l0 = v;
        else if (param == "k_out") cfg.topology.k_out = static_cast<int>(v);
        else if (param == "batch_size") cfg.optim.batch_size = static_cast<int>(v);
        else if (param == "dirichlet_alpha") cfg.data.dirichlet_alpha = v;
        else if (param == "local_iters") { cfg.optim.local_iters = static_cast<int>(v); cfg.optim.local_epochs = 0; }
        else throw dflsim::ConfigError("sweep: unsupported parameter " + param);
        cfg.validate();

        std::optional<std::filesystem::path> out_dir;
        if (!base.out.empty()) {
            std::ostringstream leaf;
            leaf << param << '=' << v;
            out_dir = std::filesystem::path(base.out) / leaf.str();
        }
        const auto result = dflsim::run_experiment(cfg, out_dir);
        const auto& last = result.metrics.back();
        std::cout << "  " << param << '=' << v << "  loss=" << last.train_loss
                  << " acc=" << last.test_accuracy << " consensus=" << last.consensus_err << '\n';
    }
    return 0;
}

int do_topology_check(int n, const std::string& generator, bool time_varying, int k_out,
                      int window_b, int rounds, std::uint64_t seed) {
    dflsim::TopologyOptions opts;
    opts.generator = dflsim::topology_generator_from_string(generator);
    opts.time_varying = time_varying;
    opts.k_out = k_out;
    opts.window_b = window_b;

    const dflsim::TopologySchedule sched(opts, n, seed);
    std::vector<dflsim::DiGraphRound> graphs;
    graphs.reserve(static_cast<std::size_t>(rounds));
    double worst_residual = 0.0;
    for (int t = 0; t < rounds; ++t) {
        graphs.push_back(sched.round(t));
        worst_residual = std::max(worst_residual, graphs.back().max_column_residual());
    }

    const auto report = dflsim::check_b_connectivity(graphs, window_b);
    std::cout << "generator=" << generator << " n=" << n << " k_out="
              << (k_out > 0 ? k_out : dflsim::default_k_out(n)) << " rounds=" << rounds
              << " B=" << window_b << '\n';
    std::cout << "column-stochastic residual: " << worst_residual
              << (worst_residual <= 1e-12 ? " (ok)" : " (VIOLATION)") << '\n';
    if (report.ok) {
        std::cout << "B-bounded strong connectivity: ok (every window of " << window_b
                  << " rounds united strongly connected)\n";
        return 0;
    }
    std::cout << "B-bounded strong connectivity: FAILED at window starting round "
              << report.failing_window << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized gossip training simulator"};
    app.require_subcommand(1);

    RunOverrides run_ov;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    add_run_options(run_cmd, run_ov);

    RunOverrides sweep_ov;
    std::string sweep_param, sweep_values;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid over one hyper-parameter");
    add_run_options(sweep_cmd, sweep_ov);
    sweep_cmd->add_option("--param", sweep_param, "rho | alpha | eta_l0 | k_out | batch_size | dirichlet_alpha | local_iters")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();

    CLI::App* topo_cmd = app.add_subcommand("topology", "topology utilities");
    topo_cmd->require_subcommand(1);
    int tc_n = 16, tc_k_out = 0, tc_window = 1, tc_rounds = 50;
    std::uint64_t tc_seed = 1;
    bool tc_varying = false;
    std::string tc_generator = "directed-kout";
    CLI::App* check_cmd = topo_cmd->add_subcommand("check", "verify B-bounded strong connectivity");
    check_cmd->add_option("--n", tc_n, "number of clients");
    check_cmd->add_option("--generator", tc_generator, "directed-ring | directed-kout | complete | symmetric");
    check_cmd->add_flag("--time-varying", tc_varying, "re-draw the graph every round");
    check_cmd->add_option("--k-out", tc_k_out, "out-neighbors per client (0 = default)");
    check_cmd->add_option("--window", tc_window, "connectivity window B");
    check_cmd->add_option("--rounds", tc_rounds, "rounds to generate");
    check_cmd->add_option("--seed", tc_seed, "schedule seed");

    std::uint64_t verify_seed = 1;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the oracle suite");
    verify_cmd->add_option("--seed", verify_seed, "suite seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return do_run(run_ov);
        if (sweep_cmd->parsed()) return do_sweep(sweep_ov, sweep_param, sweep_values);
        if (topo_cmd->parsed()) {
            return do_topology_check(tc_n, tc_generator, tc_varying, tc_k_out, tc_window, tc_rounds,
                                     tc_seed);
        }
        if (verify_cmd->parsed()) {
            const auto reports = dflsim::run_verify_suite(std::cout, verify_seed);
            return dflsim::all_passed(reports) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
