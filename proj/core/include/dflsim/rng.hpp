#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dflsim {

// Namespacing tag for random streams. Streams with different purposes are
// independent even when their (client, round, iteration) indices collide.
enum class StreamPurpose : std::uint64_t {
    DataGen = 1,
    Partition,
    ModelInit,
    Topology,
    NeighborSelect,
    Minibatch,
    ClientSample,
    QuadraticCenter,
    Test,
};

// One random stream, keyed by (seed, purpose, client, round, iteration).
// Identical keys give identical draw sequences no matter when or on which
// worker the stream is constructed, which is what makes parallel execution
// and rerun-determinism possible.
//
// Distribution transforms are implemented here rather than taken from
// <random> so that draw sequences do not depend on the standard library
// version.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, StreamPurpose purpose = StreamPurpose::Test,
                       std::uint64_t client = 0, std::uint64_t round = 0,
                       std::uint64_t iteration = 0);

    std::uint64_t next_u64();

    double uniform();                            // [0, 1)
    double uniform(double lo, double hi);
    std::uint64_t uniform_int(std::uint64_t n);  // unbiased draw from [0, n)
    double normal();                             // standard normal
    double gamma(double shape);                  // Gamma(shape, 1), shape > 0

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    std::vector<int> permutation(int n);

    // k distinct values from [0, n) \ {exclude}, drawn without replacement.
    // Weights (when non-empty, size n) bias the draw; excluded or previously
    // drawn entries get weight zero. exclude < 0 excludes nothing.
    std::vector<int> sample_without_replacement(int n, int k,
                                                std::span<const double> weights = {},
                                                int exclude = -1);

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dflsim
