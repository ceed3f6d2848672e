#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "ppcg/classical.hpp"  // Side, CoinOutcome
#include "ppcg/sampling.hpp"

namespace ppcg {

inline constexpr double kAmplitudeTolerance = 1e-12;

using Amplitude = std::complex<double>;

/// One qubit coin: amplitudes over (h, t) with h = |0>.
struct QubitState {
    Amplitude amp_h{1.0, 0.0};
    Amplitude amp_t{0.0, 0.0};

    double norm_sq() const { return std::norm(amp_h) + std::norm(amp_t); }
};

/// Two qubit box state: amplitudes over (hh, ht, th, tt), left slot first.
struct QuantumBox {
    std::array<Amplitude, 4> amp{Amplitude{1, 0}, Amplitude{0, 0}, Amplitude{0, 0}, Amplitude{0, 0}};

    double norm_sq() const {
        double s = 0;
        for (const auto& a : amp) s += std::norm(a);
        return s;
    }

    static QuantumBox basis(bool left_h, bool right_h) {
        QuantumBox b;
        b.amp = {Amplitude{0, 0}, Amplitude{0, 0}, Amplitude{0, 0}, Amplitude{0, 0}};
        b.amp[static_cast<std::size_t>((left_h ? 0 : 2) + (right_h ? 0 : 1))] = Amplitude{1, 0};
        return b;
    }
};

namespace detail {

struct Mat2 {
    // Row-major 2x2 complex matrix.
    std::array<Amplitude, 4> m;
};

inline Mat2 adjoint(const Mat2& u) {
    return Mat2{{std::conj(u.m[0]), std::conj(u.m[2]), std::conj(u.m[1]), std::conj(u.m[3])}};
}

inline QubitState apply(const Mat2& u, const QubitState& q) {
    return QubitState{u.m[0] * q.amp_h + u.m[1] * q.amp_t, u.m[2] * q.amp_h + u.m[3] * q.amp_t};
}

/// Applies a single-qubit operator to one slot of the two-qubit state.
inline QuantumBox apply_slot(const Mat2& u, const QuantumBox& b, Side side) {
    QuantumBox out;
    if (side == Side::left) {
        // Pairs (hh,th) and (ht,tt) transform together.
        for (int right = 0; right < 2; ++right) {
            const Amplitude h = b.amp[static_cast<std::size_t>(right)];
            const Amplitude t = b.amp[static_cast<std::size_t>(2 + right)];
            out.amp[static_cast<std::size_t>(right)] = u.m[0] * h + u.m[1] * t;
            out.amp[static_cast<std::size_t>(2 + right)] = u.m[2] * h + u.m[3] * t;
        }
    } else {
        for (int left = 0; left < 2; ++left) {
            const Amplitude h = b.amp[static_cast<std::size_t>(2 * left)];
            const Amplitude t = b.amp[static_cast<std::size_t>(2 * left + 1)];
            out.amp[static_cast<std::size_t>(2 * left)] = u.m[0] * h + u.m[1] * t;
            out.amp[static_cast<std::size_t>(2 * left + 1)] = u.m[2] * h + u.m[3] * t;
        }
    }
    return out;
}

}  // namespace detail

/// The parametric quantum mixing device family
///   U(chi) = 1/sqrt(2) [[1, -e^{i chi}], [e^{i chi}, 1]].
/// Every member sends |0> and |1> to equal-weight superpositions; chi = 0 is
/// the one the winning strategy uses.
struct MixingUnitary {
    double chi = 0.0;

    detail::Mat2 matrix() const {
        const double s = 1.0 / std::sqrt(2.0);
        const Amplitude phase = std::polar(1.0, chi);
        return detail::Mat2{{Amplitude{s, 0}, -phase * s, phase * s, Amplitude{s, 0}}};
    }
};

inline QubitState apply_mixing(const MixingUnitary& u, const QubitState& q) {
    return detail::apply(u.matrix(), q);
}

/// M(chi) x M(chi) acting on both compartments of a box.
inline QuantumBox apply_mix_both(const MixingUnitary& u, const QuantumBox& b) {
    const detail::Mat2 m = u.matrix();
    return detail::apply_slot(m, detail::apply_slot(m, b, Side::left), Side::right);
}

/// Born-rule probabilities over (hh, ht, th, tt).
inline std::array<double, 4> outcome_distribution(const QuantumBox& b) {
    return {std::norm(b.amp[0]), std::norm(b.amp[1]), std::norm(b.amp[2]), std::norm(b.amp[3])};
}

inline double compartment_head_probability(const QuantumBox& b, Side side) {
    if (side == Side::left) return std::norm(b.amp[0]) + std::norm(b.amp[1]);
    return std::norm(b.amp[0]) + std::norm(b.amp[2]);
}

/// Renormalized projection of the box onto one compartment outcome.
inline QuantumBox collapse_compartment(const QuantumBox& b, Side side, CoinOutcome outcome) {
    QuantumBox out = b;
    const bool head = outcome == CoinOutcome::head;
    for (std::size_t i = 0; i < 4; ++i) {
        const bool slot_head = side == Side::left ? i < 2 : (i % 2 == 0);
        if (slot_head != head) out.amp[i] = Amplitude{0, 0};
    }
    const double n = std::sqrt(out.norm_sq());
    if (n < kAmplitudeTolerance)
        throw std::domain_error("collapse onto a probability-zero outcome");
    for (auto& a : out.amp) a /= n;
    return out;
}

/// sigma_z measurement of one compartment: sampled outcome plus collapsed state.
inline std::pair<CoinOutcome, QuantumBox> measure_compartment(const QuantumBox& b, Side side,
                                                              Sampler& rng) {
    const double p_head = compartment_head_probability(b, side);
    const bool head = rng.bernoulli(std::min(1.0, std::max(0.0, p_head)));
    const CoinOutcome outcome = head ? CoinOutcome::head : CoinOutcome::tail;
    return {outcome, collapse_compartment(b, side, outcome)};
}

/// The cheating box state |phi> = (a,b,c,d) with
///   |a| = l, |b| = sqrt(k1 - l^2), |c| = sqrt(q1 - l^2),
///   |d| = sqrt(1 - k1 - q1 + l^2),   l = min(k1, q1).
/// Its compartment marginals are exactly (k1, q1), yet conditioning on the
/// min-side outcome h leaves the other compartment at probability l as well,
/// so both decoded strings coincide. Phases are an arbitrary choice; the
/// default is all-real nonnegative, and `phases` rotates each amplitude to
/// exercise the family of solutions.
inline QuantumBox cheat_state(double k1, double q1, const std::array<double, 4>& phases = {}) {
    if (!(k1 > 0.0 && k1 < 0.5) || !(q1 > 0.0 && q1 < 0.5))
        throw std::domain_error("cheat_state: string probabilities must lie in (0, 0.5)");
    const double l = std::min(k1, q1);
    const std::array<double, 4> moduli = {l, std::sqrt(k1 - l * l), std::sqrt(q1 - l * l),
                                          std::sqrt(1.0 - k1 - q1 + l * l)};
    QuantumBox out;
    for (std::size_t i = 0; i < 4; ++i) out.amp[i] = std::polar(moduli[i], phases[i]);
    return out;
}

/// The state Alice hands in for domino A1: applying the chi = 0 mixing device
/// to both compartments recovers phi.
inline QuantumBox premix_state(const QuantumBox& phi) {
    const detail::Mat2 inv = detail::adjoint(MixingUnitary{0.0}.matrix());
    return detail::apply_slot(inv, detail::apply_slot(inv, phi, Side::left), Side::right);
}

}  // namespace ppcg
