#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ppcg/rational.hpp"

namespace ppcg {

/// Deterministic random source. Every simulated game or experiment run owns
/// one of these; nothing in the library touches global RNG state.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t uniform_index(std::uint64_t bound) {
        std::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
        return d(engine_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(engine_);
    }

    /// Number of successes among n independent trials with probability p.
    std::int64_t binomial(std::int64_t n, double p) {
        if (n <= 0) return 0;
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        std::binomial_distribution<std::int64_t> d(n, p);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Largest-remainder apportionment: integer counts summing to `total`, as
/// close as possible to total * weights[i] / sum(weights). Ties break by
/// index order, which keeps the result deterministic.
inline std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<Rational>& weights) {
    const std::size_t k = weights.size();
    Rational wsum = 0;
    for (const auto& w : weights) {
        if (w < 0) throw std::invalid_argument("apportion: negative weight");
        wsum += w;
    }
    std::vector<std::int64_t> out(k, 0);
    if (total <= 0 || wsum == 0) return out;

    std::vector<Rational> remainders(k);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const Rational target = Rational(total) * weights[i] / wsum;
        const BigInt fl = numerator(target) / denominator(target);
        out[i] = fl.convert_to<std::int64_t>();
        remainders[i] = target - Rational(fl);
        assigned += out[i];
    }
    // Hand out the leftover units to the largest remainders.
    std::int64_t leftover = total - assigned;
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t j = 0; leftover > 0; j = (j + 1) % k) {
        out[order[j]] += 1;
        --leftover;
    }
    return out;
}

}  // namespace ppcg
