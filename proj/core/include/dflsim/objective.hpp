#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dflsim/dataset.hpp"
#include "dflsim/param_vector.hpp"

namespace dflsim {

// Sample positions within the owning client's shard.
struct Minibatch {
    std::vector<int> sample_indices;
    int size() const { return static_cast<int>(sample_indices.size()); }
};

// Differentiable local objective over one client's shard. evaluate and
// gradient take shard-relative indices; both are pure.
class LocalObjective {
public:
    virtual ~LocalObjective() = default;

    virtual int param_dim() const = 0;
    virtual int shard_size() const = 0;

    // Mean loss over the batch.
    virtual double evaluate(const ParamVector& x, std::span<const int> batch) const = 0;
    // Analytic mean gradient over the batch.
    virtual ParamVector gradient(const ParamVector& x, std::span<const int> batch) const = 0;

    double evaluate_full(const ParamVector& x) const;
    ParamVector gradient_full(const ParamVector& x) const;

    // Fraction of the given dataset rows the model classifies correctly;
    // objectives with no classification semantics report 0.
    virtual double accuracy(const ParamVector& /*x*/, const Dataset& /*ds*/,
                            std::span<const int> /*sample_ids*/) const {
        return 0.0;
    }

protected:
    // dimension, emptiness and bounds checks shared by all kinds
    void check_inputs(const ParamVector& x, std::span<const int> batch) const;
    std::vector<int> full_indices() const;
};

// f(x) = 1/2 ||x - c||^2, identical for every sample. Exactly 1-smooth.
class QuadraticObjective final : public LocalObjective {
public:
    explicit QuadraticObjective(ParamVector center, int shard_size = 1);

    int param_dim() const override { return static_cast<int>(center_.dim()); }
    int shard_size() const override { return shard_size_; }
    double evaluate(const ParamVector& x, std::span<const int> batch) const override;
    ParamVector gradient(const ParamVector& x, std::span<const int> batch) const override;
    const ParamVector& center() const { return center_; }

private:
    ParamVector center_;
    int shard_size_;
};

// Multinomial logistic regression with an explicit trailing bias coordinate
// per class. Parameter layout: class-major rows of (feature weights..., bias).
class LogisticObjective final : public LocalObjective {
public:
    LogisticObjective(std::shared_ptr<const Dataset> data, std::vector<int> shard);

    int param_dim() const override { return data_->n_classes() * (data_->feature_dim() + 1); }
    int shard_size() const override { return static_cast<int>(shard_.size()); }
    double evaluate(const ParamVector& x, std::span<const int> batch) const override;
    ParamVector gradient(const ParamVector& x, std::span<const int> batch) const override;
    double accuracy(const ParamVector& x, const Dataset& ds,
                    std::span<const int> sample_ids) const override;

private:
    std::shared_ptr<const Dataset> data_;
    std::vector<int> shard_;
};

// One tanh hidden layer with a softmax cross-entropy head. Parameter layout:
// [W1 (hidden x d)][b1][W2 (classes x hidden)][b2].
class MlpObjective final : public LocalObjective {
public:
    MlpObjective(std::shared_ptr<const Dataset> data, std::vector<int> shard, int hidden);

    static int params_for(int feature_dim, int hidden, int classes);
    // Uniform +/- 1/sqrt(fan_in) initialization; drawn from the client-0
    // model-init stream so a broadcast start is reproducible.
    static ParamVector init_params(int feature_dim, int hidden, int classes, std::uint64_t seed);

    int param_dim() const override;
    int shard_size() const override { return static_cast<int>(shard_.size()); }
    double evaluate(const ParamVector& x, std::span<const int> batch) const override;
    ParamVector gradient(const ParamVector& x, std::span<const int> batch) const override;
    double accuracy(const ParamVector& x, const Dataset& ds,
                    std::span<const int> sample_ids) const override;
    int hidden() const { return hidden_; }

private:
    std::shared_ptr<const Dataset> data_;
    std::vector<int> shard_;
    int hidden_;
};

// Uniform-without-replacement batch schedule: one shuffled pass over the
// shard per epoch, consecutive slices as batches. The permutation for epoch
// e is keyed by (seed, client, e) alone, so any iteration's batch can be
// recomputed independently of execution order.
class MinibatchSampler {
public:
    MinibatchSampler(int shard_size, int batch_size, std::uint64_t seed, int client);

    int batches_per_epoch() const { return batches_per_epoch_; }
    Minibatch batch_for(long global_iter) const;

private:
    int shard_size_;
    int batch_size_;
    std::uint64_t seed_;
    int client_;
    int batches_per_epoch_;
    mutable long cached_epoch_ = -1;
    mutable std::vector<int> cached_perm_;
};

} // namespace dflsim
