#include "dflsim/experiment.hpp"

#include <chrono>
#include <ctime>
#include <deque>
#include <iostream>

#include "dflsim/errors.hpp"

namespace dflsim {
namespace {

std::string iso_timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RoundMetrics make_round_metrics(int round, const GlobalEval& ev, double consensus,
                                const RoundInvariants& inv, std::int64_t wall_ms) {
    RoundMetrics m;
    m.round = round;
    m.train_loss = ev.train_loss;
    m.test_accuracy = ev.test_accuracy;
    m.grad_norm_sq = ev.grad_norm_sq;
    m.consensus_err = consensus;
    m.min_w = inv.min_w;
    m.max_w = inv.max_w;
    m.wall_ms = wall_ms;
    return m;
}

} // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentSetup setup;

    if (cfg.model.kind == ModelKind::Quadratic) {
        // centers drawn per client; the global optimum is their centroid
        for (int i = 0; i < cfg.n_clients; ++i) {
            SeededRng rng(cfg.seed, StreamPurpose::QuadraticCenter, static_cast<std::uint64_t>(i));
            ParamVector center(static_cast<std::size_t>(cfg.model.quadratic_dim));
            for (std::size_t k = 0; k < center.dim(); ++k) center[k] = rng.uniform(-1.0, 1.0);
            setup.objectives.push_back(std::make_unique<QuadraticObjective>(std::move(center)));
        }
        setup.x0 = ParamVector(static_cast<std::size_t>(cfg.model.quadratic_dim), 0.0);
        return setup;
    }

    if (cfg.data.source == DataSource::Synthetic) {
        auto tt = make_synthetic(cfg.data.classes, cfg.data.per_class, cfg.data.dim, cfg.data.sep,
                                 cfg.seed);
        setup.train = std::make_shared<Dataset>(std::move(tt.train));
        setup.test = std::make_shared<Dataset>(std::move(tt.test));
    } else {
        const int train_limit = cfg.data.limit;
        setup.train = std::make_shared<Dataset>(
            load_idx(cfg.data.train_images, cfg.data.train_labels, train_limit, Split::Train));
        if (!cfg.data.test_images.empty()) {
            setup.test = std::make_shared<Dataset>(load_idx(cfg.data.test_images,
                                                            cfg.data.test_labels,
                                                            cfg.data.test_limit, Split::Test));
        }
    }

    setup.partition = cfg.data.partition == PartitionKind::Dirichlet
                          ? dirichlet_partition(*setup.train, cfg.n_clients,
                                                cfg.data.dirichlet_alpha, cfg.seed)
                          : iid_partition(*setup.train, cfg.n_clients, cfg.seed);

    for (int i = 0; i < cfg.n_clients; ++i) {
        auto shard = setup.partition.client_shards[static_cast<std::size_t>(i)];
        if (cfg.model.kind == ModelKind::Logistic) {
            setup.objectives.push_back(
                std::make_unique<LogisticObjective>(setup.train, std::move(shard)));
        } else {
            setup.objectives.push_back(
                std::make_unique<MlpObjective>(setup.train, std::move(shard), cfg.model.hidden));
        }
    }

    if (cfg.model.kind == ModelKind::Logistic) {
        setup.x0 = ParamVector(static_cast<std::size_t>(setup.objectives.front()->param_dim()), 0.0);
    } else {
        setup.x0 = MlpObjective::init_params(setup.train->feature_dim(), cfg.model.hidden,
                                             setup.train->n_classes(), cfg.seed);
    }
    return setup;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir,
                                const RoundObserver& observer) {
    cfg.validate();
    const bool symmetric_family =
        is_decentralized(cfg.algorithm) &&
        required_family(cfg.algorithm) == GraphFamily::DoublyStochastic;
    if (symmetric_family &&
        cfg.topology.generator != TopologyGenerator::SymmetricDoublyStochastic) {
        throw ConfigError(std::string("config: ") + to_string(cfg.algorithm) +
                          " needs the symmetric topology generator");
    }

    ExperimentSetup setup = build_setup(cfg);
    std::vector<ClientState> states = init_states(cfg.n_clients, setup.x0);

    const bool strategy = uses_strategy_selection(cfg.algorithm);
    if (strategy) {
        for (auto& st : states) {
            st.last_loss =
                setup.objectives[static_cast<std::size_t>(st.client_id)]->evaluate_full(st.x);
        }
    }

    const TopologySchedule schedule(cfg.topology, cfg.n_clients, cfg.seed);
    const int k_out = cfg.topology.k_out > 0 ? cfg.topology.k_out : default_k_out(cfg.n_clients);

    std::unique_ptr<MetricsWriter> writer;
    std::unique_ptr<std::ofstream> timing;
    if (out_dir) {
        RunManifest manifest;
        manifest.config_json = to_json_text(cfg);
        manifest.seed = cfg.seed;
        manifest.code_version = kCodeVersion;
        manifest.started_at = iso_timestamp_utc();
        write_manifest(*out_dir, manifest);
        writer = std::make_unique<MetricsWriter>(*out_dir / "metrics.csv");
        timing = std::make_unique<std::ofstream>(*out_dir / "timing.csv", std::ios::trunc);
        *timing << "round,wall_ms\n";
    }

    ExperimentResult result;
    auto record = [&](const RoundMetrics& m, const RoundInvariants& inv) {
        result.metrics.push_back(m);
        if (writer) writer->append(m);
        if (timing) *timing << m.round << ',' << m.wall_ms << '\n';
        if (observer) observer(m, inv);
    };

    // row 0: the shared initialization, before any training
    {
        const GlobalEval ev = evaluate_global(states, setup.objectives, setup.test.get());
        RoundInvariants inv0;
        record(make_round_metrics(0, ev, consensus_error(states), inv0, 0), inv0);
    }

    std::deque<DiGraphRound> window;
    for (int t = 0; t < cfg.rounds; ++t) {
        const auto started = std::chrono::steady_clock::now();

        LocalHyper hyper;
        hyper.eta_l = eta_at_round(cfg.optim, t);
        hyper.rho = cfg.optim.rho;
        hyper.alpha = cfg.optim.alpha;
        hyper.local_iters = cfg.optim.local_iters;
        hyper.local_epochs = cfg.optim.local_epochs;
        hyper.batch_size = cfg.optim.batch_size;

        DiGraphRound graph = [&]() {
            if (strategy) {
                std::vector<double> losses(static_cast<std::size_t>(cfg.n_clients));
                for (int i = 0; i < cfg.n_clients; ++i) {
                    losses[static_cast<std::size_t>(i)] = states[static_cast<std::size_t>(i)].last_loss;
                }
                return strategy_round(losses, k_out, t, cfg.seed);
            }
            return schedule.round(t);
        }();

        RoundInvariants inv;
        try {
            inv = run_round(states, setup.objectives, cfg.algorithm, graph, hyper, t, cfg.seed,
                            cfg.threads, strategy);
        } catch (const SimError& e) {
            throw ProtocolError("experiment aborted at round " + std::to_string(t) + ": " + e.what());
        }

        if (is_decentralized(cfg.algorithm) && cfg.topology.window_b >= 1) {
            window.push_back(graph);
            if (static_cast<int>(window.size()) > cfg.topology.window_b) window.pop_front();
            if (static_cast<int>(window.size()) == cfg.topology.window_b) {
                const std::vector<DiGraphRound> rounds(window.begin(), window.end());
                if (!check_b_connectivity(rounds, cfg.topology.window_b).ok) {
                    ++result.b_connectivity_violations;
                    if (result.b_connectivity_violations == 1) {
                        std::cerr << "warning: rounds " << t - cfg.topology.window_b + 1 << ".." << t
                                  << " violate B-bounded strong connectivity\n";
                    }
                }
            }
        }

        const GlobalEval ev = evaluate_global(states, setup.objectives, setup.test.get());
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        record(make_round_metrics(t + 1, ev, consensus_error(states), inv, elapsed.count()), inv);
    }

    result.final_states = std::move(states);
    result.final_mean_x = mean_x(result.final_states);
    return result;
}

} // namespace dflsim
