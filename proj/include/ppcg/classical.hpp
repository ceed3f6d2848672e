#pragma once

#include <stdexcept>
#include <utility>

#include "ppcg/rational.hpp"
#include "ppcg/sampling.hpp"

namespace ppcg {

enum class Side { left, right };
enum class CoinOutcome { head, tail };

/// A classical coin: probability vector (p, 1-p) over (h, t).
struct ClassicalCoin {
    Rational p_head;

    ClassicalCoin() : p_head(1, 2) {}
    explicit ClassicalCoin(Rational p) : p_head(std::move(p)) {
        if (p_head < 0 || p_head > 1) throw std::invalid_argument("coin probability outside [0,1]");
    }
    static ClassicalCoin heads() { return ClassicalCoin(Rational(1)); }
    static ClassicalCoin tails() { return ClassicalCoin(Rational(0)); }

    friend bool operator==(const ClassicalCoin&, const ClassicalCoin&) = default;
};

/// A classical two-coin box: joint distribution over (hh, ht, th, tt),
/// stored as the first three components. First slot is the left compartment.
struct ClassicalBox {
    Rational alpha;  // p(hh)
    Rational beta;   // p(ht)
    Rational gamma;  // p(th)

    ClassicalBox() : alpha(1, 4), beta(1, 4), gamma(1, 4) {}
    ClassicalBox(Rational a, Rational b, Rational g)
        : alpha(std::move(a)), beta(std::move(b)), gamma(std::move(g)) {
        if (alpha < 0 || beta < 0 || gamma < 0 || alpha + beta + gamma > 1)
            throw std::invalid_argument("box probabilities must be nonnegative and sum to <= 1");
    }

    Rational delta() const { return 1 - alpha - beta - gamma; }

    Rational left_head() const { return alpha + beta; }
    Rational right_head() const { return alpha + gamma; }

    static ClassicalBox deterministic(bool left_h, bool right_h) {
        return ClassicalBox(Rational(left_h && right_h ? 1 : 0), Rational(left_h && !right_h ? 1 : 0),
                            Rational(!left_h && right_h ? 1 : 0));
    }

    friend bool operator==(const ClassicalBox&, const ClassicalBox&) = default;
};

/// Box carrying independent coins with head probabilities p and q.
inline ClassicalBox product_box(const Rational& p, const Rational& q) {
    if (p < 0 || p > 1 || q < 0 || q > 1)
        throw std::invalid_argument("product_box probabilities outside [0,1]");
    return ClassicalBox(p * q, p * (1 - q), (1 - p) * q);
}

/// The separability criterion: a box is uncorrelated iff alpha*delta == beta*gamma.
inline bool is_uncorrelated(const ClassicalBox& b) {
    return b.alpha * b.delta() == b.beta * b.gamma;
}

/// Classical mixing device on a coin: the constant stochastic map to C_{1/2}.
inline ClassicalCoin mix_coin(const ClassicalCoin&) { return ClassicalCoin(Rational(1, 2)); }

/// Classical mixing device on both compartments: every box becomes uniform.
inline ClassicalBox mix_box(const ClassicalBox&) {
    return ClassicalBox(Rational(1, 4), Rational(1, 4), Rational(1, 4));
}

/// Measurement collapse rule: sampled outcome plus the updated (collapsed)
/// coin, which repeats the outcome on remeasurement.
inline std::pair<CoinOutcome, ClassicalCoin> measure_coin(const ClassicalCoin& c, Sampler& rng) {
    const bool head = rng.bernoulli(to_double(c.p_head));
    return {head ? CoinOutcome::head : CoinOutcome::tail,
            head ? ClassicalCoin::heads() : ClassicalCoin::tails()};
}

/// Bayes-normalized restriction of the joint distribution to one observed
/// compartment outcome.
inline ClassicalBox condition_box(const ClassicalBox& b, Side side, CoinOutcome outcome) {
    const bool head = outcome == CoinOutcome::head;
    Rational whh = 0, wht = 0, wth = 0, wtt = 0;
    if (side == Side::left) {
        if (head) {
            whh = b.alpha;
            wht = b.beta;
        } else {
            wth = b.gamma;
            wtt = b.delta();
        }
    } else {
        if (head) {
            whh = b.alpha;
            wth = b.gamma;
        } else {
            wht = b.beta;
            wtt = b.delta();
        }
    }
    const Rational total = whh + wht + wth + wtt;
    if (total == 0) throw std::domain_error("conditioning on a probability-zero outcome");
    return ClassicalBox(whh / total, wht / total, wth / total);
}

/// Samples one compartment and returns the outcome with the conditional box.
inline std::pair<CoinOutcome, ClassicalBox> measure_box_compartment(const ClassicalBox& b, Side side,
                                                                    Sampler& rng) {
    const Rational p_head = side == Side::left ? b.left_head() : b.right_head();
    const bool head = rng.bernoulli(to_double(p_head));
    const CoinOutcome outcome = head ? CoinOutcome::head : CoinOutcome::tail;
    return {outcome, condition_box(b, side, outcome)};
}

}  // namespace ppcg
