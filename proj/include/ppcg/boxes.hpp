#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppcg/classical.hpp"
#include "ppcg/quantum.hpp"
#include "ppcg/rational.hpp"
#include "ppcg/sampling.hpp"

namespace ppcg {

/// Box labels as they travel through the protocol. Transitions only move
/// forward: unverified -> mixed -> one of the outcome labels.
enum class Label { unverified, mixed, hh, ht, th, tt };

enum class JointOutcome : int { hh = 0, ht = 1, th = 2, tt = 3 };

inline Label label_for(JointOutcome o) {
    switch (o) {
        case JointOutcome::hh: return Label::hh;
        case JointOutcome::ht: return Label::ht;
        case JointOutcome::th: return Label::th;
        case JointOutcome::tt: return Label::tt;
    }
    throw std::logic_error("bad outcome");
}

inline bool is_outcome_label(Label l) { return l != Label::unverified && l != Label::mixed; }

inline JointOutcome outcome_for(Label l) {
    switch (l) {
        case Label::hh: return JointOutcome::hh;
        case Label::ht: return JointOutcome::ht;
        case Label::th: return JointOutcome::th;
        case Label::tt: return JointOutcome::tt;
        default: throw std::logic_error("label carries no outcome");
    }
}

inline std::string label_name(Label l) {
    switch (l) {
        case Label::unverified: return "unverified";
        case Label::mixed: return "mixed";
        case Label::hh: return "hh";
        case Label::ht: return "ht";
        case Label::th: return "th";
        case Label::tt: return "tt";
    }
    throw std::logic_error("bad label");
}

inline int label_rank(Label l) {
    if (l == Label::unverified) return 0;
    return l == Label::mixed ? 1 : 2;
}

inline CoinOutcome left_of(JointOutcome o) {
    return static_cast<int>(o) < 2 ? CoinOutcome::head : CoinOutcome::tail;
}
inline CoinOutcome right_of(JointOutcome o) {
    return static_cast<int>(o) % 2 == 0 ? CoinOutcome::head : CoinOutcome::tail;
}

/// Classical physics plugged into the protocol. Probabilities are exact
/// rationals, so exact-mode verifications compare with equality.
struct ClassicalPhysics {
    using Box = ClassicalBox;
    using Prob = Rational;
    static constexpr const char* name = "classical";

    static Prob head_probability(const Box& b, Side s) {
        return s == Side::left ? b.left_head() : b.right_head();
    }
    static Box collapse(const Box& b, Side s, CoinOutcome o) { return condition_box(b, s, o); }
    static Box mix(const Box& b) { return mix_box(b); }
    static Box basis(JointOutcome o) {
        return ClassicalBox::deterministic(left_of(o) == CoinOutcome::head,
                                           right_of(o) == CoinOutcome::head);
    }
    static bool probs_match(const Prob& a, const Prob& b) { return a == b; }
    static double to_sampling(const Prob& p) { return to_double(p); }
    static Rational to_rational(const Prob& p) { return p; }
    static Prob from_rational(const Rational& r) { return r; }
    static std::string repr(const Prob& p) { return to_fraction_string(p); }
};

/// Quantum physics plugged into the protocol. Amplitudes live in doubles, so
/// exact-mode comparisons allow the 1e-12 amplitude tolerance.
struct QuantumPhysics {
    using Box = QuantumBox;
    using Prob = double;
    static constexpr const char* name = "quantum";

    static Prob head_probability(const Box& b, Side s) { return compartment_head_probability(b, s); }
    static Box collapse(const Box& b, Side s, CoinOutcome o) { return collapse_compartment(b, s, o); }
    static Box mix(const Box& b) { return apply_mix_both(MixingUnitary{0.0}, b); }
    static Box basis(JointOutcome o) {
        return QuantumBox::basis(left_of(o) == CoinOutcome::head, right_of(o) == CoinOutcome::head);
    }
    static bool probs_match(Prob a, Prob b) { return std::abs(a - b) <= kAmplitudeTolerance; }
    static double to_sampling(Prob p) { return p; }
    static Rational to_rational(Prob p) { return rational_from_double(p); }
    static Prob from_rational(const Rational& r) { return to_double(r); }
    static std::string repr(Prob p) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", p);
        return buf;
    }
};

/// The player's devices. Verifiers and the referee only ever touch boxes
/// through these, mirroring that the hardware comes from Alice. Honest
/// devices delegate to the physics; rigged ones exist for negative tests.
template <class P>
struct DeviceSet {
    std::function<typename P::Prob(const typename P::Box&, Side)> head_probability;
    std::function<typename P::Box(const typename P::Box&, Side, CoinOutcome)> collapse;
    std::function<typename P::Box(const typename P::Box&)> mix;
};

template <class P>
DeviceSet<P> honest_devices() {
    return DeviceSet<P>{
        [](const typename P::Box& b, Side s) { return P::head_probability(b, s); },
        [](const typename P::Box& b, Side s, CoinOutcome o) { return P::collapse(b, s, o); },
        [](const typename P::Box& b) { return P::mix(b); },
    };
}

/// A set of identically prepared boxes. `qty` is an integer count in sampled
/// mode and an exact weight in exact mode.
template <class P>
struct BoxGroup {
    typename P::Box state;
    Label label = Label::unverified;
    Rational qty;
};

template <class P>
struct Pool {
    std::vector<BoxGroup<P>> groups;

    void add(typename P::Box state, Label label, Rational qty) {
        if (qty < 0) throw std::invalid_argument("negative box quantity");
        if (qty == 0) return;
        groups.push_back(BoxGroup<P>{std::move(state), label, std::move(qty)});
    }

    Rational total() const {
        Rational t = 0;
        for (const auto& g : groups) t += g.qty;
        return t;
    }

    std::int64_t total_count() const { return to_int64(total()); }

    bool empty() const { return groups.empty(); }

    /// Exact-mode split: every group contributes the same fraction to each
    /// part. `fractions` must sum to at most 1.
    std::vector<Pool> split_fractions(const std::vector<Rational>& fractions) const {
        std::vector<Pool> parts(fractions.size());
        for (std::size_t j = 0; j < fractions.size(); ++j)
            for (const auto& g : groups) parts[j].add(g.state, g.label, g.qty * fractions[j]);
        return parts;
    }

    /// Sampled-mode split into parts of the given sizes. Boxes within a group
    /// are identically prepared and exchangeable, so a proportional
    /// largest-remainder allocation stands in for drawing a uniformly random
    /// subset; the result is deterministic.
    std::vector<Pool> split_counts(const std::vector<std::int64_t>& sizes) const {
        std::int64_t want = 0;
        for (auto s : sizes) want += s;
        if (want > total_count()) throw std::invalid_argument("split sizes exceed pool");
        std::vector<Rational> remaining;
        remaining.reserve(groups.size());
        for (const auto& g : groups) remaining.push_back(g.qty);
        std::vector<Pool> parts(sizes.size());
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            const auto take = apportion(sizes[j], remaining);
            for (std::size_t g = 0; g < groups.size(); ++g) {
                parts[j].add(groups[g].state, groups[g].label, Rational(take[g]));
                remaining[g] -= take[g];
            }
        }
        return parts;
    }
};

/// Pool-level head frequency: the qty-weighted average of per-group
/// probabilities, i.e. what an infinite-statistics measurement would see.
template <class P>
typename P::Prob pooled_head_probability(const Pool<P>& pool, Side side, const DeviceSet<P>& dev) {
    const Rational total = pool.total();
    if (total == 0) throw std::domain_error("empty pool has no marginal");
    typename P::Prob acc{};
    for (const auto& g : pool.groups)
        acc += dev.head_probability(g.state, side) * P::from_rational(g.qty / total);
    return acc;
}

}  // namespace ppcg
