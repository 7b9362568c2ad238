#include "dflsim/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dflsim/errors.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {
namespace {

// log-sum-exp with max shift; logits buffer is overwritten with softmax probs
double softmax_inplace(std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : logits) v /= z;
    return m + std::log(z); // log normalizer, for the loss
}

void check_gradient_finite(const ParamVector& g, const char* kind) {
    if (!g.all_finite()) {
        throw SimError(std::string(kind) + ": non-finite gradient");
    }
}

} // namespace

double LocalObjective::evaluate_full(const ParamVector& x) const {
    const auto idx = full_indices();
    return evaluate(x, idx);
}

ParamVector LocalObjective::gradient_full(const ParamVector& x) const {
    const auto idx = full_indices();
    return gradient(x, idx);
}

std::vector<int> LocalObjective::full_indices() const {
    std::vector<int> idx(static_cast<std::size_t>(shard_size()));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

void LocalObjective::check_inputs(const ParamVector& x, std::span<const int> batch) const {
    if (static_cast<int>(x.dim()) != param_dim()) {
        throw DimMismatchError("objective: parameter dimension mismatch, " +
                               std::to_string(x.dim()) + " vs " + std::to_string(param_dim()));
    }
    if (batch.empty()) throw DataFormatError("objective: empty batch");
    for (int i : batch) {
        if (i < 0 || i >= shard_size()) {
            throw DataFormatError("objective: batch index " + std::to_string(i) +
                                  " outside shard of size " + std::to_string(shard_size()));
        }
    }
}

// ---- quadratic ----

QuadraticObjective::QuadraticObjective(ParamVector center, int shard_size)
    : center_(std::move(center)), shard_size_(shard_size) {
    if (shard_size_ < 1) throw DataFormatError("QuadraticObjective: shard_size must be >= 1");
}

double QuadraticObjective::evaluate(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    const double d = l2_distance(x, center_);
    return 0.5 * d * d;
}

ParamVector QuadraticObjective::gradient(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    return axpy(-1.0, center_, x); // x - c
}

// ---- logistic regression ----

LogisticObjective::LogisticObjective(std::shared_ptr<const Dataset> data, std::vector<int> shard)
    : data_(std::move(data)), shard_(std::move(shard)) {
    if (!data_) throw DataFormatError("LogisticObjective: null dataset");
    if (shard_.empty()) throw DataFormatError("LogisticObjective: empty shard");
}

double LogisticObjective::evaluate(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    const int d = data_->feature_dim();
    const int classes = data_->n_classes();
    const int stride = d + 1;

    double loss = 0.0;
    std::vector<double> logits(static_cast<std::size_t>(classes));
    for (int b : batch) {
        const int s = shard_[static_cast<std::size_t>(b)];
        const auto row = data_->sample(s);
        for (int c = 0; c < classes; ++c) {
            const double* wc = x.data() + static_cast<std::size_t>(c) * stride;
            double logit = wc[d]; // bias
            for (int k = 0; k < d; ++k) logit += wc[k] * row[static_cast<std::size_t>(k)];
            logits[static_cast<std::size_t>(c)] = logit;
        }
        const double log_z = softmax_inplace(logits);
        // -log p_y = log_z - logit_y, but logits were overwritten; recompute logit_y
        const int y = data_->label(s);
        const double* wy = x.data() + static_cast<std::size_t>(y) * stride;
        double logit_y = wy[d];
        for (int k = 0; k < d; ++k) logit_y += wy[k] * row[static_cast<std::size_t>(k)];
        loss += log_z - logit_y;
    }
    return loss / static_cast<double>(batch.size());
}

ParamVector LogisticObjective::gradient(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    const int d = data_->feature_dim();
    const int classes = data_->n_classes();
    const int stride = d + 1;

    ParamVector grad(x.dim());
    std::vector<double> logits(static_cast<std::size_t>(classes));
    for (int b : batch) {
        const int s = shard_[static_cast<std::size_t>(b)];
        const auto row = data_->sample(s);
        for (int c = 0; c < classes; ++c) {
            const double* wc = x.data() + static_cast<std::size_t>(c) * stride;
            double logit = wc[d];
            for (int k = 0; k < d; ++k) logit += wc[k] * row[static_cast<std::size_t>(k)];
            logits[static_cast<std::size_t>(c)] = logit;
        }
        softmax_inplace(logits);
        const int y = data_->label(s);
        for (int c = 0; c < classes; ++c) {
            const double coef = logits[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
            double* gc = grad.data() + static_cast<std::size_t>(c) * stride;
            for (int k = 0; k < d; ++k) gc[k] += coef * row[static_cast<std::size_t>(k)];
            gc[d] += coef;
        }
    }
    scale_inplace(1.0 / static_cast<double>(batch.size()), grad);
    check_gradient_finite(grad, "logistic");
    return grad;
}

double LogisticObjective::accuracy(const ParamVector& x, const Dataset& ds,
                                   std::span<const int> sample_ids) const {
    if (sample_ids.empty()) return 0.0;
    const int d = ds.feature_dim();
    const int classes = data_->n_classes();
    const int stride = d + 1;
    int correct = 0;
    for (int s : sample_ids) {
        const auto row = ds.sample(s);
        int best = 0;
        double best_logit = -1e300;
        for (int c = 0; c < classes; ++c) {
            const double* wc = x.data() + static_cast<std::size_t>(c) * stride;
            double logit = wc[d];
            for (int k = 0; k < d; ++k) logit += wc[k] * row[static_cast<std::size_t>(k)];
            if (logit > best_logit) {
                best_logit = logit;
                best = c;
            }
        }
        if (best == ds.label(s)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(sample_ids.size());
}

// ---- one-hidden-layer MLP ----

MlpObjective::MlpObjective(std::shared_ptr<const Dataset> data, std::vector<int> shard, int hidden)
    : data_(std::move(data)), shard_(std::move(shard)), hidden_(hidden) {
    if (!data_) throw DataFormatError("MlpObjective: null dataset");
    if (shard_.empty()) throw DataFormatError("MlpObjective: empty shard");
    if (hidden_ < 1) throw DataFormatError("MlpObjective: hidden width must be >= 1");
}

int MlpObjective::params_for(int feature_dim, int hidden, int classes) {
    return hidden * feature_dim + hidden + classes * hidden + classes;
}

ParamVector MlpObjective::init_params(int feature_dim, int hidden, int classes, std::uint64_t seed) {
    SeededRng rng(seed, StreamPurpose::ModelInit, /*client=*/0);
    ParamVector p(static_cast<std::size_t>(params_for(feature_dim, hidden, classes)));
    const double s1 = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::size_t k = 0;
    const std::size_t layer1 = static_cast<std::size_t>(hidden) * feature_dim + hidden;
    for (; k < layer1; ++k) p[k] = rng.uniform(-s1, s1);
    for (; k < p.dim(); ++k) p[k] = rng.uniform(-s2, s2);
    return p;
}

int MlpObjective::param_dim() const {
    return params_for(data_->feature_dim(), hidden_, data_->n_classes());
}

double MlpObjective::evaluate(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    const int d = data_->feature_dim();
    const int h = hidden_;
    const int classes = data_->n_classes();
    const double* w1 = x.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(classes) * h;

    std::vector<double> act(static_cast<std::size_t>(h));
    std::vector<double> logits(static_cast<std::size_t>(classes));
    double loss = 0.0;
    for (int b : batch) {
        const int s = shard_[static_cast<std::size_t>(b)];
        const auto row = data_->sample(s);
        for (int j = 0; j < h; ++j) {
            const double* wj = w1 + static_cast<std::size_t>(j) * d;
            double pre = b1[j];
            for (int k = 0; k < d; ++k) pre += wj[k] * row[static_cast<std::size_t>(k)];
            act[static_cast<std::size_t>(j)] = std::tanh(pre);
        }
        for (int c = 0; c < classes; ++c) {
            const double* wc = w2 + static_cast<std::size_t>(c) * h;
            double logit = b2[c];
            for (int j = 0; j < h; ++j) logit += wc[j] * act[static_cast<std::size_t>(j)];
            logits[static_cast<std::size_t>(c)] = logit;
        }
        const int y = data_->label(s);
        const double logit_y = logits[static_cast<std::size_t>(y)];
        const double log_z = softmax_inplace(logits);
        loss += log_z - logit_y;
    }
    return loss / static_cast<double>(batch.size());
}

ParamVector MlpObjective::gradient(const ParamVector& x, std::span<const int> batch) const {
    check_inputs(x, batch);
    const int d = data_->feature_dim();
    const int h = hidden_;
    const int classes = data_->n_classes();
    const double* w1 = x.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(classes) * h;

    ParamVector grad(x.dim());
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + static_cast<std::size_t>(h) * d;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + static_cast<std::size_t>(classes) * h;

    std::vector<double> act(static_cast<std::size_t>(h));
    std::vector<double> probs(static_cast<std::size_t>(classes));
    std::vector<double> d_hidden(static_cast<std::size_t>(h));
    for (int b : batch) {
        const int s = shard_[static_cast<std::size_t>(b)];
        const auto row = data_->sample(s);
        for (int j = 0; j < h; ++j) {
            const double* wj = w1 + static_cast<std::size_t>(j) * d;
            double pre = b1[j];
            for (int k = 0; k < d; ++k) pre += wj[k] * row[static_cast<std::size_t>(k)];
            act[static_cast<std::size_t>(j)] = std::tanh(pre);
        }
        for (int c = 0; c < classes; ++c) {
            const double* wc = w2 + static_cast<std::size_t>(c) * h;
            double logit = b2[c];
            for (int j = 0; j < h; ++j) logit += wc[j] * act[static_cast<std::size_t>(j)];
            probs[static_cast<std::size_t>(c)] = logit;
        }
        softmax_inplace(probs);
        const int y = data_->label(s);

        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (int c = 0; c < classes; ++c) {
            const double coef = probs[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
            const double* wc = w2 + static_cast<std::size_t>(c) * h;
            double* gc = g_w2 + static_cast<std::size_t>(c) * h;
            for (int j = 0; j < h; ++j) {
                gc[j] += coef * act[static_cast<std::size_t>(j)];
                d_hidden[static_cast<std::size_t>(j)] += coef * wc[j];
            }
            g_b2[c] += coef;
        }
        for (int j = 0; j < h; ++j) {
            const double a = act[static_cast<std::size_t>(j)];
            const double dpre = d_hidden[static_cast<std::size_t>(j)] * (1.0 - a * a);
            double* gj = g_w1 + static_cast<std::size_t>(j) * d;
            for (int k = 0; k < d; ++k) gj[k] += dpre * row[static_cast<std::size_t>(k)];
            g_b1[j] += dpre;
        }
    }
    scale_inplace(1.0 / static_cast<double>(batch.size()), grad);
    check_gradient_finite(grad, "mlp");
    return grad;
}

double MlpObjective::accuracy(const ParamVector& x, const Dataset& ds,
                              std::span<const int> sample_ids) const {
    if (sample_ids.empty()) return 0.0;
    const int d = ds.feature_dim();
    const int h = hidden_;
    const int classes = data_->n_classes();
    const double* w1 = x.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(classes) * h;

    std::vector<double> act(static_cast<std::size_t>(h));
    int correct = 0;
    for (int s : sample_ids) {
        const auto row = ds.sample(s);
        for (int j = 0; j < h; ++j) {
            const double* wj = w1 + static_cast<std::size_t>(j) * d;
            double pre = b1[j];
            for (int k = 0; k < d; ++k) pre += wj[k] * row[static_cast<std::size_t>(k)];
            act[static_cast<std::size_t>(j)] = std::tanh(pre);
        }
        int best = 0;
        double best_logit = -1e300;
        for (int c = 0; c < classes; ++c) {
            const double* wc = w2 + static_cast<std::size_t>(c) * h;
            double logit = b2[c];
            for (int j = 0; j < h; ++j) logit += wc[j] * act[static_cast<std::size_t>(j)];
            if (logit > best_logit) {
                best_logit = logit;
                best = c;
            }
        }
        if (best == ds.label(s)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(sample_ids.size());
}

// ---- minibatch schedule ----

MinibatchSampler::MinibatchSampler(int shard_size, int batch_size, std::uint64_t seed, int client)
    : shard_size_(shard_size), batch_size_(std::min(batch_size, shard_size)), seed_(seed),
      client_(client) {
    if (shard_size_ < 1) throw DataFormatError("MinibatchSampler: empty shard");
    if (batch_size < 1) throw DataFormatError("MinibatchSampler: batch size must be >= 1");
    batches_per_epoch_ = (shard_size_ + batch_size_ - 1) / batch_size_;
}

Minibatch MinibatchSampler::batch_for(long global_iter) const {
    const long epoch = global_iter / batches_per_epoch_;
    const int slot = static_cast<int>(global_iter % batches_per_epoch_);
    if (epoch != cached_epoch_) {
        SeededRng rng(seed_, StreamPurpose::Minibatch, static_cast<std::uint64_t>(client_),
                      static_cast<std::uint64_t>(epoch));
        cached_perm_ = rng.permutation(shard_size_);
        cached_epoch_ = epoch;
    }
    const int begin = slot * batch_size_;
    const int end = std::min(begin + batch_size_, shard_size_);
    Minibatch mb;
    mb.sample_indices.assign(cached_perm_.begin() + begin, cached_perm_.begin() + end);
    return mb;
}

} // namespace dflsim
