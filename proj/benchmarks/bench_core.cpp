#include <benchmark/benchmark.h>

#include "dflsim/dataset.hpp"
#include "dflsim/objective.hpp"
#include "dflsim/param_vector.hpp"
#include "dflsim/partition.hpp"
#include "dflsim/rng.hpp"

namespace {

dflsim::ParamVector random_vector(std::size_t dim, std::uint64_t seed) {
    dflsim::SeededRng rng(seed, dflsim::StreamPurpose::Test);
    dflsim::ParamVector x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = rng.normal();
    return x;
}

void BM_axpy(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto x = random_vector(dim, 1);
    auto y = random_vector(dim, 2);
    for (auto _ : state) {
        dflsim::axpy_inplace(0.9, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_axpy)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);

void BM_l2_norm(benchmark::State& state) {
    const auto x = random_vector(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dflsim::l2_norm(x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_l2_norm)->Arg(1 << 10)->Arg(1 << 18);

void BM_logistic_gradient(benchmark::State& state) {
    const int batch_size = static_cast<int>(state.range(0));
    auto tt = dflsim::make_synthetic(10, 64, 64, 3.0, 5);
    auto data = std::make_shared<dflsim::Dataset>(std::move(tt.train));
    std::vector<int> shard;
    for (int i = 0; i < data->size(); ++i) shard.push_back(i);
    dflsim::LogisticObjective obj(data, shard);

    const auto x = random_vector(static_cast<std::size_t>(obj.param_dim()), 7);
    std::vector<int> batch;
    for (int i = 0; i < batch_size; ++i) batch.push_back(i % obj.shard_size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(obj.gradient(x, batch));
    }
    state.SetItemsProcessed(state.iterations() * batch_size);
}
BENCHMARK(BM_logistic_gradient)->Arg(16)->Arg(128);

void BM_dirichlet_partition(benchmark::State& state) {
    auto tt = dflsim::make_synthetic(10, 1000, 8, 3.0, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dflsim::dirichlet_partition(tt.train, 100, 0.3, 17));
    }
}
BENCHMARK(BM_dirichlet_partition);

} // namespace
