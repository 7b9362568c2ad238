#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "dflsim/dataset.hpp"
#include "dflsim/errors.hpp"
#include "dflsim/grad_check.hpp"
#include "dflsim/objective.hpp"
#include "dflsim/rng.hpp"

using namespace dflsim;

namespace {

std::shared_ptr<const Dataset> blob_data(int classes, int per_class, int dim, std::uint64_t seed) {
    auto tt = make_synthetic(classes, per_class, dim, 3.0, seed);
    return std::make_shared<Dataset>(std::move(tt.train));
}

std::vector<int> iota_shard(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

} // namespace

TEST_SUITE("objective") {

TEST_CASE("quadratic evaluate and gradient") {
    QuadraticObjective at_origin(ParamVector{0.0, 0.0});
    const std::vector<int> batch{0};
    CHECK(at_origin.evaluate(ParamVector{0.0, 0.0}, batch) == 0.0);

    QuadraticObjective off_center(ParamVector{1.0, 0.0});
    CHECK(off_center.evaluate(ParamVector{3.0, 0.0}, batch) == doctest::Approx(2.0));
    CHECK(off_center.gradient(ParamVector{3.0, 0.0}, batch) == ParamVector{2.0, 0.0});
}

TEST_CASE("quadratic is exactly 1-smooth") {
    QuadraticObjective obj(ParamVector{0.5, -0.25, 2.0});
    SeededRng rng(3, StreamPurpose::Test);
    const std::vector<int> batch{0};
    for (int i = 0; i < 20; ++i) {
        ParamVector x(3), y(3);
        for (std::size_t k = 0; k < 3; ++k) {
            x[k] = rng.normal();
            y[k] = rng.normal();
        }
        const double lhs = l2_distance(obj.gradient(x, batch), obj.gradient(y, batch));
        const double rhs = l2_distance(x, y);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("logistic zero-logit loss is ln 2 on two classes") {
    // single sample with all-zero features: any weights with zero bias give
    // uniform class probabilities
    std::vector<double> feat(4, 0.0);
    std::vector<int> lab{0};
    auto ds = std::make_shared<Dataset>(std::move(feat), 4, std::move(lab), 2, Split::Train);
    LogisticObjective obj(ds, {0});

    ParamVector x(static_cast<std::size_t>(obj.param_dim()), 0.0);
    SeededRng rng(5, StreamPurpose::Test);
    for (int c = 0; c < 2; ++c) {
        for (int k = 0; k < 4; ++k) x[static_cast<std::size_t>(c * 5 + k)] = rng.normal();
        // bias coordinate stays zero
    }
    const std::vector<int> batch{0};
    CHECK(obj.evaluate(x, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
    auto ds = blob_data(3, 12, 4, 77);
    const auto shard = iota_shard(ds->size());

    std::vector<std::pair<std::unique_ptr<LocalObjective>, double>> cases;
    cases.emplace_back(std::make_unique<LogisticObjective>(ds, shard), 1e-5);
    cases.emplace_back(std::make_unique<MlpObjective>(ds, shard, 5), 1e-4);
    cases.emplace_back(std::make_unique<QuadraticObjective>(ParamVector{1.0, -2.0, 0.0, 0.5}), 1e-5);

    SeededRng rng(19, StreamPurpose::Test);
    for (auto& [obj, tol] : cases) {
        for (int p = 0; p < 20; ++p) {
            ParamVector x(static_cast<std::size_t>(obj->param_dim()));
            for (std::size_t k = 0; k < x.dim(); ++k) x[k] = 0.5 * rng.normal();
            const ParamVector analytic = obj->gradient_full(x);
            const ParamVector fd =
                finite_diff_grad([&](const ParamVector& q) { return obj->evaluate_full(q); }, x);
            CHECK(rel_error(fd, analytic) < tol);
        }
    }
}

TEST_CASE("batch gradient equals the mean of per-sample gradients") {
    auto ds = blob_data(2, 8, 3, 11);
    LogisticObjective obj(ds, iota_shard(ds->size()));
    SeededRng rng(23, StreamPurpose::Test);
    ParamVector x(static_cast<std::size_t>(obj.param_dim()));
    for (std::size_t k = 0; k < x.dim(); ++k) x[k] = rng.normal();

    const auto full = iota_shard(obj.shard_size());
    const ParamVector batch_grad = obj.gradient(x, full);

    ParamVector mean(x.dim(), 0.0);
    for (int i = 0; i < obj.shard_size(); ++i) {
        const std::vector<int> single{i};
        axpy_inplace(1.0, obj.gradient(x, single), mean);
    }
    scale_inplace(1.0 / obj.shard_size(), mean);
    CHECK(max_abs_diff(batch_grad, mean) < 1e-14);
}

TEST_CASE("unbiasedness over exhaustive equal-size minibatches") {
    // mean over all size-2 batches of a 6-sample shard equals the full
    // gradient up to float tolerance
    auto ds = blob_data(2, 4, 3, 13);
    LogisticObjective obj(ds, {0, 1, 2, 3, 4, 5});
    SeededRng rng(29, StreamPurpose::Test);
    ParamVector x(static_cast<std::size_t>(obj.param_dim()));
    for (std::size_t k = 0; k < x.dim(); ++k) x[k] = rng.normal();

    ParamVector mean(x.dim(), 0.0);
    int count = 0;
    for (int i = 0; i < 6; ++i) {
        for (int j = i + 1; j < 6; ++j) {
            const std::vector<int> batch{i, j};
            axpy_inplace(1.0, obj.gradient(x, batch), mean);
            ++count;
        }
    }
    scale_inplace(1.0 / count, mean);
    const ParamVector full = obj.gradient_full(x);
    CHECK(max_abs_diff(mean, full) < 1e-12);
}

TEST_CASE("error paths: empty batch, bad index, dimension mismatch") {
    auto ds = blob_data(2, 4, 3, 17);
    LogisticObjective obj(ds, iota_shard(4));
    ParamVector ok(static_cast<std::size_t>(obj.param_dim()), 0.0);

    CHECK_THROWS_AS(obj.evaluate(ok, std::vector<int>{}), DataFormatError);
    CHECK_THROWS_AS(obj.evaluate(ok, std::vector<int>{99}), DataFormatError);
    CHECK_THROWS_AS(obj.evaluate(ParamVector{1.0}, std::vector<int>{0}), DimMismatchError);
}

TEST_CASE("mlp init is reproducible and in the fan-in range") {
    const ParamVector a = MlpObjective::init_params(8, 4, 3, 99);
    const ParamVector b = MlpObjective::init_params(8, 4, 3, 99);
    CHECK(a == b);
    const double bound1 = 1.0 / std::sqrt(8.0);
    for (std::size_t k = 0; k < 8 * 4 + 4; ++k) CHECK(std::abs(a[k]) <= bound1);
}

TEST_CASE("sampler walks each epoch without replacement") {
    MinibatchSampler sampler(10, 3, 7, 0);
    CHECK(sampler.batches_per_epoch() == 4);

    std::vector<int> seen;
    for (long g = 0; g < 4; ++g) {
        const Minibatch mb = sampler.batch_for(g);
        seen.insert(seen.end(), mb.sample_indices.begin(), mb.sample_indices.end());
    }
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < 10; ++i) CHECK(seen[static_cast<std::size_t>(i)] == i);

    // recomputation is order-independent
    MinibatchSampler other(10, 3, 7, 0);
    CHECK(other.batch_for(2).sample_indices == sampler.batch_for(2).sample_indices);
}

} // TEST_SUITE
