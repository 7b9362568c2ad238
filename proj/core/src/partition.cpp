#include "dflsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dflsim/errors.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {
namespace {

constexpr int kMaxRedraws = 100;

// integer counts from proportions, conserving the total exactly
std::vector<int> largest_remainder_counts(const std::vector<double>& props, int total) {
    const int n = static_cast<int>(props.size());
    std::vector<int> counts(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> remainders; // (-frac, index) for stable ordering
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double quota = props[static_cast<std::size_t>(i)] * total;
        const int base = static_cast<int>(std::floor(quota));
        counts[static_cast<std::size_t>(i)] = base;
        assigned += base;
        remainders.emplace_back(-(quota - base), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (int r = 0; r < total - assigned; ++r) {
        counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r)].second)] += 1;
    }
    return counts;
}

Partition partition_impl(const Dataset& ds, int n_clients, double alpha, bool iid,
                         std::uint64_t seed) {
    if (n_clients < 1) throw DataFormatError("partition: need at least one client");
    if (!iid && !(alpha > 0.0)) throw DataFormatError("partition: alpha must be positive");
    if (ds.size() < n_clients) {
        throw DataFormatError("partition: dataset of " + std::to_string(ds.size()) +
                              " samples cannot cover " + std::to_string(n_clients) + " clients");
    }

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.n_classes()));
    for (int i = 0; i < ds.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].empty()) {
            throw DataFormatError("partition: class " + std::to_string(c) + " has no samples");
        }
    }

    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        std::vector<std::vector<int>> shards(static_cast<std::size_t>(n_clients));
        for (int c = 0; c < ds.n_classes(); ++c) {
            SeededRng rng(seed, StreamPurpose::Partition, static_cast<std::uint64_t>(attempt),
                          static_cast<std::uint64_t>(c));
            std::vector<int> idxs = by_class[static_cast<std::size_t>(c)];
            rng.shuffle(idxs);

            std::vector<double> props(static_cast<std::size_t>(n_clients), 1.0 / n_clients);
            if (!iid) {
                double total = 0.0;
                for (auto& p : props) {
                    p = rng.gamma(alpha);
                    total += p;
                }
                for (auto& p : props) p /= total;
            }

            const auto counts = largest_remainder_counts(props, static_cast<int>(idxs.size()));
            std::size_t pos = 0;
            for (int i = 0; i < n_clients; ++i) {
                auto& shard = shards[static_cast<std::size_t>(i)];
                for (int k = 0; k < counts[static_cast<std::size_t>(i)]; ++k) {
                    shard.push_back(idxs[pos++]);
                }
            }
        }

        const bool all_covered = std::all_of(shards.begin(), shards.end(),
                                             [](const auto& s) { return !s.empty(); });
        if (all_covered || iid) {
            if (!all_covered) break; // iid with an empty client cannot improve on retry
            Partition p;
            p.client_shards = std::move(shards);
            p.dirichlet_alpha = iid ? 0.0 : alpha;
            p.iid = iid;
            return p;
        }
    }
    throw DataFormatError("partition: a client received zero samples in " +
                          std::to_string(kMaxRedraws) +
                          " draws; use a larger dataset or larger alpha");
}

} // namespace

Partition dirichlet_partition(const Dataset& ds, int n_clients, double alpha, std::uint64_t seed) {
    return partition_impl(ds, n_clients, alpha, /*iid=*/false, seed);
}

Partition iid_partition(const Dataset& ds, int n_clients, std::uint64_t seed) {
    return partition_impl(ds, n_clients, 0.0, /*iid=*/true, seed);
}

double mean_label_entropy(const Dataset& ds, const Partition& p) {
    double total = 0.0;
    for (const auto& shard : p.client_shards) {
        std::vector<int> hist(static_cast<std::size_t>(ds.n_classes()), 0);
        for (int i : shard) hist[static_cast<std::size_t>(ds.label(i))] += 1;
        double h = 0.0;
        for (int count : hist) {
            if (count == 0) continue;
            const double q = static_cast<double>(count) / static_cast<double>(shard.size());
            h -= q * std::log(q);
        }
        total += h;
    }
    return total / static_cast<double>(p.client_shards.size());
}

void validate_partition(const Dataset& ds, const Partition& p) {
    std::vector<int> seen;
    for (const auto& shard : p.client_shards) {
        seen.insert(seen.end(), shard.begin(), shard.end());
    }
    std::sort(seen.begin(), seen.end());
    if (static_cast<int>(seen.size()) != ds.size()) {
        throw ProtocolError("partition: shards cover " + std::to_string(seen.size()) +
                            " samples, dataset has " + std::to_string(ds.size()));
    }
    for (int i = 0; i < ds.size(); ++i) {
        if (seen[static_cast<std::size_t>(i)] != i) {
            throw ProtocolError("partition: shards are not a disjoint cover (near index " +
                                std::to_string(i) + ")");
        }
    }
}

} // namespace dflsim
