#pragma once

#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "ppcg/protocol.hpp"

namespace ppcg {

namespace detail {

/// Joint-measurement branches of one box state: collapsed state and branch
/// probability per outcome (hh, ht, th, tt), in outcome order.
template <class P>
std::array<std::pair<typename P::Box, Rational>, 4> joint_branches(const typename P::Box& state) {
    std::array<std::pair<typename P::Box, Rational>, 4> out;
    const auto pl = P::head_probability(state, Side::left);
    for (int o = 0; o < 4; ++o) {
        const JointOutcome jo = static_cast<JointOutcome>(o);
        const bool lh = left_of(jo) == CoinOutcome::head;
        const Rational p_left = P::to_rational(pl);
        const Rational branch_l = lh ? p_left : 1 - p_left;
        if (branch_l == 0) {
            out[static_cast<std::size_t>(o)] = {P::basis(jo), Rational(0)};
            continue;
        }
        const auto bl = P::collapse(state, Side::left, left_of(jo));
        const Rational p_right = P::to_rational(P::head_probability(bl, Side::right));
        const Rational branch_r = right_of(jo) == CoinOutcome::head ? p_right : 1 - p_right;
        if (branch_r == 0) {
            out[static_cast<std::size_t>(o)] = {P::basis(jo), Rational(0)};
            continue;
        }
        out[static_cast<std::size_t>(o)] = {P::collapse(bl, Side::right, right_of(jo)),
                                            branch_l * branch_r};
    }
    return out;
}

/// Alice's honest encoding move: measure every mixed box, relabel with the
/// observed outcomes, then pick a quarter of the pool whose label counts
/// apportion `target` (a distribution over hh, ht, th, tt). Labels always
/// state the true outcome. When an outcome runs short the deficit spills to
/// the next outcome in order, which keeps the selection total exact.
template <class P>
Pool<P> measure_and_select(const Pool<P>& mixed, const std::array<Rational, 4>& target, Mode mode,
                           Sampler& rng) {
    std::array<Pool<P>, 4> by_outcome;
    std::array<Rational, 4> available{Rational(0), Rational(0), Rational(0), Rational(0)};

    for (const auto& g : mixed.groups) {
        const auto branches = joint_branches<P>(g.state);
        if (mode == Mode::exact) {
            for (int o = 0; o < 4; ++o) {
                const auto& [state, p] = branches[static_cast<std::size_t>(o)];
                const Rational w = g.qty * p;
                if (w == 0) continue;
                by_outcome[static_cast<std::size_t>(o)].add(
                    state, label_for(static_cast<JointOutcome>(o)), w);
                available[static_cast<std::size_t>(o)] += w;
            }
        } else {
            // Multinomial split via sequential binomials.
            std::int64_t remaining = to_int64(g.qty);
            Rational mass(1);
            for (int o = 0; o < 4 && remaining > 0; ++o) {
                const auto& [state, p] = branches[static_cast<std::size_t>(o)];
                std::int64_t taken;
                if (o == 3) {
                    taken = remaining;
                } else {
                    const Rational cond = mass == 0 ? Rational(0) : p / mass;
                    taken = rng.binomial(remaining, std::min(1.0, to_double(cond)));
                }
                mass -= p;
                if (taken == 0) continue;
                by_outcome[static_cast<std::size_t>(o)].add(
                    state, label_for(static_cast<JointOutcome>(o)), Rational(taken));
                available[static_cast<std::size_t>(o)] += taken;
                remaining -= taken;
            }
        }
    }

    // Desired quarter, per outcome.
    std::array<Rational, 4> want;
    if (mode == Mode::exact) {
        const Rational quarter = mixed.total() / 4;
        for (int o = 0; o < 4; ++o)
            want[static_cast<std::size_t>(o)] = quarter * target[static_cast<std::size_t>(o)];
    } else {
        const std::int64_t quarter = mixed.total_count() / 4;
        const auto counts = apportion(quarter, {target[0], target[1], target[2], target[3]});
        for (int o = 0; o < 4; ++o) want[static_cast<std::size_t>(o)] = Rational(counts[static_cast<std::size_t>(o)]);
    }
    // Cap by availability and spill any deficit forward.
    Rational deficit(0);
    std::array<Rational, 4> take;
    for (int o = 0; o < 4; ++o) {
        const auto i = static_cast<std::size_t>(o);
        take[i] = std::min(want[i], available[i]);
        deficit += want[i] - take[i];
    }
    for (int o = 0; o < 4 && deficit > 0; ++o) {
        const auto i = static_cast<std::size_t>(o);
        const Rational slack = available[i] - take[i];
        const Rational extra = std::min(deficit, slack);
        take[i] += extra;
        deficit -= extra;
    }

    Pool<P> encoded;
    for (int o = 0; o < 4; ++o) {
        const auto i = static_cast<std::size_t>(o);
        if (take[i] == 0) continue;
        if (mode == Mode::exact) {
            const Rational scale = take[i] / available[i];
            for (const auto& g : by_outcome[i].groups) encoded.add(g.state, g.label, g.qty * scale);
        } else {
            std::vector<Rational> weights;
            for (const auto& g : by_outcome[i].groups) weights.push_back(g.qty);
            const auto alloc = apportion(to_int64(take[i]), weights);
            for (std::size_t g = 0; g < by_outcome[i].groups.size(); ++g)
                encoded.add(by_outcome[i].groups[g].state, by_outcome[i].groups[g].label,
                            Rational(alloc[g]));
        }
    }
    return encoded;
}

inline std::array<Rational, 4> product_target(const Rational& k, const Rational& q) {
    return {k * q, k * (1 - q), (1 - k) * q, (1 - k) * (1 - q)};
}

/// The strongest natural classical cheat on a domino: the measured-box blend
/// whose conditional decode would repeat the first string, i.e. the classical
/// shadow of the quantum cheat state's moduli. Correlated as a mixture, so
/// the step-3 count identity exposes it whenever k != q.
inline std::array<Rational, 4> correlated_cheat_target(const Rational& k, const Rational& q) {
    const Rational l = std::min(k, q);
    return {l * l, k - l * l, q - l * l, 1 - k - q + l * l};
}

}  // namespace detail

/// Honest classical play: solve the instance within budget (else claim "no
/// match") and encode every domino as the true product distribution.
class ClassicalHonestStrategy final : public PlayerStrategy<ClassicalPhysics> {
public:
    std::string name() const override { return "classical-honest"; }

    Claim claim(const PcpInstance& instance, const SearchBudget& solver, Sampler&) override {
        if (auto arr = find_match(instance, solver)) return Claim::order(*arr);
        return Claim::no_match();
    }

    DeviceSet<ClassicalPhysics> provide_devices() override {
        return honest_devices<ClassicalPhysics>();
    }

    Pool<ClassicalPhysics> provide_boxes(int, const Domino&, const StringProbability&,
                                         const StringProbability&, std::int64_t n, Mode,
                                         Sampler&) override {
        Pool<ClassicalPhysics> pool;
        pool.add(ClassicalBox(), Label::unverified, Rational(n));
        return pool;
    }

    Pool<ClassicalPhysics> encode(const Pool<ClassicalPhysics>& mixed, int, const Domino&,
                                  const StringProbability& k, const StringProbability& q, Mode mode,
                                  Sampler& rng) override {
        return detail::measure_and_select(mixed, detail::product_target(k.value, q.value), mode, rng);
    }
};

/// Classical cheating attempt used for negative tests: always claims "A1" and
/// encodes that domino with the correlated blend that would make both decoded
/// strings equal. Labels stay truthful (V1 remeasures labeled boxes, so lying
/// about them is caught outright); the correlation itself trips step 3.
class ClassicalCheatStrategy final : public PlayerStrategy<ClassicalPhysics> {
public:
    std::string name() const override { return "classical-cheat"; }

    Claim claim(const PcpInstance&, const SearchBudget&, Sampler&) override {
        return Claim::order({1});
    }

    DeviceSet<ClassicalPhysics> provide_devices() override {
        return honest_devices<ClassicalPhysics>();
    }

    Pool<ClassicalPhysics> provide_boxes(int, const Domino&, const StringProbability&,
                                         const StringProbability&, std::int64_t n, Mode,
                                         Sampler&) override {
        Pool<ClassicalPhysics> pool;
        pool.add(ClassicalBox(), Label::unverified, Rational(n));
        return pool;
    }

    Pool<ClassicalPhysics> encode(const Pool<ClassicalPhysics>& mixed, int domino_index,
                                  const Domino&, const StringProbability& k,
                                  const StringProbability& q, Mode mode, Sampler& rng) override {
        const auto target = domino_index == 1 ? detail::correlated_cheat_target(k.value, q.value)
                                              : detail::product_target(k.value, q.value);
        return detail::measure_and_select(mixed, target, mode, rng);
    }
};

/// The paper's quantum winning strategy: claim "A1" regardless of the
/// instance, hand in boxes whose mixing produces the cheat state |phi>, and
/// select a quarter of them untouched (labels stay "mixed", so V1 never
/// measures them). Remaining dominoes are encoded honestly by measuring.
class QuantumCheatStrategy final : public PlayerStrategy<QuantumPhysics> {
public:
    explicit QuantumCheatStrategy(std::array<double, 4> phases = {}) : phases_(phases) {}

    std::string name() const override { return "quantum-cheat"; }

    Claim claim(const PcpInstance&, const SearchBudget&, Sampler&) override {
        return Claim::order({1});
    }

    DeviceSet<QuantumPhysics> provide_devices() override { return honest_devices<QuantumPhysics>(); }

    Pool<QuantumPhysics> provide_boxes(int domino_index, const Domino&, const StringProbability& k,
                                       const StringProbability& q, std::int64_t n, Mode,
                                       Sampler&) override {
        Pool<QuantumPhysics> pool;
        if (domino_index == 1) {
            const QuantumBox phi = cheat_state(to_double(k.value), to_double(q.value), phases_);
            pool.add(premix_state(phi), Label::unverified, Rational(n));
        } else {
            pool.add(QuantumBox::basis(true, true), Label::unverified, Rational(n));
        }
        return pool;
    }

    Pool<QuantumPhysics> encode(const Pool<QuantumPhysics>& mixed, int domino_index, const Domino&,
                                const StringProbability& k, const StringProbability& q, Mode mode,
                                Sampler& rng) override {
        if (domino_index != 1)
            return detail::measure_and_select(mixed, detail::product_target(k.value, q.value), mode,
                                              rng);
        // No measurement, no relabelling: just a quarter of the mixed pool.
        if (mode == Mode::exact) return mixed.split_fractions({Rational(1, 4)})[0];
        return mixed.split_counts({mixed.total_count() / 4})[0];
    }

private:
    std::array<double, 4> phases_;
};

inline std::unique_ptr<PlayerStrategy<ClassicalPhysics>> make_classical_honest() {
    return std::make_unique<ClassicalHonestStrategy>();
}
inline std::unique_ptr<PlayerStrategy<ClassicalPhysics>> make_classical_cheat() {
    return std::make_unique<ClassicalCheatStrategy>();
}
inline std::unique_ptr<PlayerStrategy<QuantumPhysics>> make_quantum_cheat(
    std::array<double, 4> phases = {}) {
    return std::make_unique<QuantumCheatStrategy>(phases);
}

}  // namespace ppcg
