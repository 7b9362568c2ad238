#include "dflsim/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dflsim/errors.hpp"

#include "json.hpp"

namespace dflsim {
namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& field, const char* what) {
    try {
        return std::stod(field);
    } catch (const std::exception&) {
        throw DataFormatError(std::string("metrics csv: bad ") + what + " field '" + field + "'");
    }
}

} // namespace

const char* MetricsWriter::header() {
    return "round,train_loss,test_accuracy,grad_norm_sq,consensus_error,min_w,max_w";
}

MetricsWriter::MetricsWriter(const std::filesystem::path& csv_path)
    : out_(csv_path, std::ios::trunc) {
    if (!out_) throw DataFormatError("metrics: cannot open " + csv_path.string());
}

std::string format_metrics_row(const RoundMetrics& m) {
    std::ostringstream row;
    row << m.round << ',' << fmt_double(m.train_loss) << ',' << fmt_double(m.test_accuracy) << ','
        << fmt_double(m.grad_norm_sq) << ',' << fmt_double(m.consensus_err) << ','
        << fmt_double(m.min_w) << ',' << fmt_double(m.max_w);
    return row.str();
}

void MetricsWriter::append(const RoundMetrics& m) {
    if (m.round != last_round_ + 1) {
        throw DataFormatError("metrics: out-of-order round " + std::to_string(m.round) +
                              " after " + std::to_string(last_round_));
    }
    if (last_round_ == -1) out_ << header() << '\n';
    out_ << format_metrics_row(m) << '\n';
    out_.flush();
    last_round_ = m.round;
}

std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataFormatError("metrics: cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataFormatError("metrics: empty file " + csv_path.string());
    if (line != MetricsWriter::header()) {
        throw DataFormatError("metrics: unexpected header in " + csv_path.string());
    }

    std::vector<RoundMetrics> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7) {
            throw DataFormatError("metrics: malformed row '" + line + "'");
        }
        RoundMetrics m;
        m.round = static_cast<int>(parse_double(fields[0], "round"));
        m.train_loss = parse_double(fields[1], "train_loss");
        m.test_accuracy = parse_double(fields[2], "test_accuracy");
        m.grad_norm_sq = parse_double(fields[3], "grad_norm_sq");
        m.consensus_err = parse_double(fields[4], "consensus_error");
        m.min_w = parse_double(fields[5], "min_w");
        m.max_w = parse_double(fields[6], "max_w");
        rows.push_back(m);
    }
    return rows;
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
    std::filesystem::create_directories(run_dir);
    const auto path = run_dir / "manifest.json";
    if (std::filesystem::exists(path)) {
        throw DataFormatError("manifest already exists in " + run_dir.string() +
                              "; refusing to mix runs in one directory");
    }
    nlohmann::ordered_json j;
    j["code_version"] = m.code_version;
    j["seed"] = m.seed;
    j["started_at"] = m.started_at;
    j["config"] = nlohmann::ordered_json::parse(m.config_json);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataFormatError("manifest: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

GlobalEval evaluate_global(std::span<const ClientState> states,
                           const std::vector<std::unique_ptr<LocalObjective>>& objectives,
                           const Dataset* test_set) {
    const ParamVector xbar = mean_x(states);
    const int n = static_cast<int>(states.size());

    GlobalEval ev;
    ParamVector grad_acc(xbar.dim(), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto& obj = *objectives[static_cast<std::size_t>(i)];
        ev.train_loss += obj.evaluate_full(xbar);
        axpy_inplace(1.0, obj.gradient_full(xbar), grad_acc);
    }
    ev.train_loss /= static_cast<double>(n);
    scale_inplace(1.0 / static_cast<double>(n), grad_acc);
    ev.grad_norm_sq = dot(grad_acc, grad_acc);

    if (test_set != nullptr && test_set->size() > 0) {
        std::vector<int> all(static_cast<std::size_t>(test_set->size()));
        std::iota(all.begin(), all.end(), 0);
        ev.test_accuracy = objectives.front()->accuracy(xbar, *test_set, all);
    }
    return ev;
}

} // namespace dflsim
