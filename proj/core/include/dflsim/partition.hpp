#pragma once

#include <cstdint>
#include <vector>

#include "dflsim/dataset.hpp"

namespace dflsim {

// Disjoint per-client sample-index shards covering one dataset split.
struct Partition {
    std::vector<std::vector<int>> client_shards;
    double dirichlet_alpha = 0.0; // 0 when iid
    bool iid = false;
};

// Per class, draws client proportions ~ Dir(alpha) and assigns that class's
// samples with largest-remainder rounding (conserves the per-class total
// exactly). Re-draws the whole assignment, up to 100 attempts, while any
// client would end up with zero samples.
Partition dirichlet_partition(const Dataset& ds, int n_clients, double alpha, std::uint64_t seed);

// alpha -> infinity limit: each class split as evenly as integer counts
// allow, so every client's label histogram tracks the global one within
// one sample per class.
Partition iid_partition(const Dataset& ds, int n_clients, std::uint64_t seed);

// Mean over clients of the Shannon entropy (nats) of the client's label
// distribution. Diagnostic for heterogeneity comparisons.
double mean_label_entropy(const Dataset& ds, const Partition& p);

// Throws ProtocolError unless shards are disjoint and cover [0, ds.size()).
void validate_partition(const Dataset& ds, const Partition& p);

} // namespace dflsim
