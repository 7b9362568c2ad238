#include "dflsim/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dflsim/errors.hpp"

namespace dflsim {
namespace {

// splitmix64 finalizer; chained to fold the stream key into one state word
std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h += 0x9e3779b97f4a7c15ull + v;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

} // namespace

SeededRng::SeededRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t client,
                     std::uint64_t round, std::uint64_t iteration) {
    std::uint64_t h = mix(0x6a09e667f3bcc908ull, seed);
    h = mix(h, static_cast<std::uint64_t>(purpose));
    h = mix(h, client);
    h = mix(h, round);
    h = mix(h, iteration);
    engine_.seed(h);
}

std::uint64_t SeededRng::next_u64() {
    return engine_();
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    if (n == 0) throw SimError("uniform_int: n must be positive");
    const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= bound);
    return x % n;
}

double SeededRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // Box-Muller; u1 kept away from 0 so log() stays finite
    double u1 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double SeededRng::gamma(double shape) {
    if (!(shape > 0.0)) throw SimError("gamma: shape must be positive, got " + std::to_string(shape));
    if (shape < 1.0) {
        // boost: Gamma(a) = Gamma(a+1) * U^(1/a)
        const double g = gamma(shape + 1.0);
        double u = uniform();
        if (u < 0x1.0p-53) u = 0x1.0p-53;
        return g * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0x1.0p-53 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<int> SeededRng::permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    shuffle(p);
    return p;
}

std::vector<int> SeededRng::sample_without_replacement(int n, int k, std::span<const double> weights,
                                                       int exclude) {
    const int available = n - (exclude >= 0 && exclude < n ? 1 : 0);
    if (k > available) {
        throw SimError("sample_without_replacement: requested " + std::to_string(k) +
                       " from support of size " + std::to_string(available));
    }
    if (!weights.empty() && static_cast<int>(weights.size()) != n) {
        throw SimError("sample_without_replacement: weights size " + std::to_string(weights.size()) +
                       " != n " + std::to_string(n));
    }

    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (!weights.empty()) {
        for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = weights[static_cast<std::size_t>(i)];
    }
    if (exclude >= 0 && exclude < n) w[static_cast<std::size_t>(exclude)] = 0.0;

    std::vector<int> result;
    result.reserve(static_cast<std::size_t>(k));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    if (exclude >= 0 && exclude < n) taken[static_cast<std::size_t>(exclude)] = 1;
    for (int draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (double wi : w) total += wi;
        if (!(total > 0.0)) {
            // remaining weights underflowed to zero; mathematically they are
            // positive, so continue uniformly over what is left
            for (int i = 0; i < n; ++i) {
                w[static_cast<std::size_t>(i)] = taken[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
                total += w[static_cast<std::size_t>(i)];
            }
        }
        const double target = uniform() * total;
        double acc = 0.0;
        int chosen = -1;
        for (int i = 0; i < n; ++i) {
            acc += w[static_cast<std::size_t>(i)];
            if (target < acc) {
                chosen = i;
                break;
            }
        }
        if (chosen < 0) {
            // floating-point edge at target == total: take the last non-zero entry
            for (int i = n - 1; i >= 0; --i) {
                if (w[static_cast<std::size_t>(i)] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        result.push_back(chosen);
        w[static_cast<std::size_t>(chosen)] = 0.0;
    }
    return result;
}

} // namespace dflsim
