#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace forkwatch {

// Deterministic randomness wrapper. Everything that needs a random draw in
// this library goes through Rng rather than <random> distributions: the
// standard distributions (and std::shuffle) are implementation-defined, which
// would break byte-identical outputs across toolchains for the same seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform double in [0, 1) with 53 significant bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }

    // Number of Bernoulli(p) trials up to and including the first success (>= 1).
    std::uint64_t geometric(double p) {
        if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("Rng::geometric: p must be in (0,1]");
        if (p == 1.0) return 1;
        double u = uniform();
        double k = std::floor(std::log1p(-u) / std::log1p(-p));
        if (k < 0) k = 0;  // guard against rounding at u ~ 0
        return static_cast<std::uint64_t>(k) + 1;
    }

    // Exponential variate with the given mean (inverse CDF).
    double exponential(double mean) {
        if (!(mean > 0.0)) throw std::invalid_argument("Rng::exponential: mean must be positive");
        return -mean * std::log1p(-uniform());
    }

    // Fisher-Yates; deterministic for a given seed, unlike std::shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Index drawn proportionally to weights[i]; weights must be non-negative
    // with a positive sum.
    std::size_t pick_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("Rng::pick_weighted: weight sum must be positive");
        double x = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (x < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace forkwatch
