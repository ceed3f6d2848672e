#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ppcg/boxes.hpp"
#include "ppcg/pcp.hpp"
#include "ppcg/rational.hpp"
#include "ppcg/sampling.hpp"
#include "ppcg/stats.hpp"

namespace ppcg {

enum class Mode { exact, sampled };

inline std::string mode_name(Mode m) { return m == Mode::exact ? "exact" : "sampled"; }

struct Tolerances {
    double step1_alpha = 1e-6;  // significance of the device uniformity test
    double step3_eps = 0.01;    // sampled-mode slack on the count product identity
    double step4_eps = 0.01;    // sampled-mode slack on the marginal frequencies
};

struct Budgets {
    SearchBudget solver{200000, 64};     // Alice's match search
    SearchBudget referee{1000000, 128};  // referee's search on a "no match" claim
};

struct GameConfig {
    Mode mode = Mode::exact;
    std::uint64_t seed = 0;
    // c in N(l) = c * 10^(2l), the boxes-per-digit budget. c = 25 puts the
    // decode frequency five standard errors inside the half-ulp window at the
    // worst-case probability, which is what "uncertainty reduced to l digits"
    // needs; c = 1 would leave only one standard error.
    double n_constant = 25.0;
    int step1_rounds = 2;  // mix/remeasure cycles during device verification
    Tolerances tolerances;
    Budgets budgets;
};

inline void validate_config(const GameConfig& cfg) {
    const auto& t = cfg.tolerances;
    if (!(t.step1_alpha > 0 && t.step1_alpha < 1) || !(t.step3_eps > 0 && t.step3_eps < 1) ||
        !(t.step4_eps > 0 && t.step4_eps < 1))
        throw std::invalid_argument("tolerances must lie in (0,1)");
    if (cfg.budgets.solver.max_expansions <= 0 || cfg.budgets.solver.max_length <= 0 ||
        cfg.budgets.referee.max_expansions <= 0 || cfg.budgets.referee.max_length <= 0)
        throw std::invalid_argument("budgets must be positive");
    if (!(cfg.n_constant > 0)) throw std::invalid_argument("n_constant must be positive");
    if (cfg.step1_rounds < 1) throw std::invalid_argument("step1_rounds must be >= 1");
}

/// Boxes Alice must bring per domino. Sampled mode follows the budget
///   N = 24 * ceil(N(l_max + 1) / p_min),  N(l) = c * 10^(2l),
/// so the referee still holds N(l_max+1) boxes for the second decode after
/// every earlier step consumed its share. Exact mode propagates distributions
/// symbolically, so one unit of weight per surviving stage suffices: N = 24.
inline std::int64_t required_boxes(const PcpInstance& inst, const GameConfig& cfg) {
    validate_instance(inst);
    if (cfg.mode == Mode::exact) return 24;
    const int l = longest_string_length(inst) + 1;
    if (l > 8) throw std::invalid_argument("box budget overflows int64 for strings this long");
    const Rational n_l = rational_from_double(cfg.n_constant) * Rational(pow10(static_cast<unsigned>(2 * l)));
    const Rational ratio = n_l / min_string_probability(inst);
    BigInt n_prime = numerator(ratio) / denominator(ratio);
    if (Rational(n_prime) < ratio) n_prime += 1;
    const BigInt total = 24 * n_prime;
    if (total > BigInt(std::numeric_limits<std::int64_t>::max() / 2))
        throw std::invalid_argument("box budget overflows int64");
    return total.convert_to<std::int64_t>();
}

/// What Alice sends the referee: a matching order, or the "no match" claim.
struct Claim {
    std::optional<Arrangement> arrangement;

    static Claim no_match() { return Claim{std::nullopt}; }
    static Claim order(Arrangement a) { return Claim{std::move(a)}; }
};

enum class Verdict { win, lose };

inline std::string verdict_name(Verdict v) { return v == Verdict::win ? "win" : "lose"; }

// Failure sites recorded in transcripts.
inline constexpr const char* kFailStep1 = "step1";
inline constexpr const char* kFailStep2 = "step2";
inline constexpr const char* kFailStep3 = "step3";
inline constexpr const char* kFailStep4 = "step4";
inline constexpr const char* kFailStep5Decode = "step5-decode";
inline constexpr const char* kFailStep5Mismatch = "step5-mismatch";
inline constexpr const char* kFailNoMatchRefuted = "no-match-refuted";
inline constexpr const char* kFailClaimInvalid = "claim-invalid";

struct Message {
    std::string from;
    std::string to;
    std::string what;
    int domino = 0;  // 0 = game-level
    int step = 0;
};

struct Step1Record {
    std::string submitted, verified, mixed;
    std::int64_t stability_samples = 0;
    std::int64_t stability_mismatches = 0;
    std::int64_t uniformity_samples = 0;
    std::int64_t uniformity_heads = 0;
    double p_value = 1.0;
    bool pass = false;
};

struct Step2Record {
    std::string mixed_in, encoded, discarded;
    std::map<std::string, std::string> labels;
    bool pass = false;
};

struct Step3Record {
    std::array<std::string, 4> counts;  // hh, ht, th, tt
    std::string lhs, rhs, gap, threshold;
    std::int64_t audit_samples = 0;
    std::int64_t audit_mismatches = 0;
    bool pass = false;
};

struct Step4Record {
    std::string checked_each, forwarded;
    std::string left_frequency, right_frequency;
    std::string expected_k, expected_q;
    std::string instruction;
    bool pass = false;
};

struct Step5Record {
    std::string measured, survivors;
    std::string first_frequency, second_frequency;
    std::string first_string, second_string;
    bool decode_ok = false;
};

struct DominoRecord {
    int index = 0;
    std::string numerator, denominator;
    std::string k, q;
    Step1Record step1;
    Step2Record step2;
    Step3Record step3;
    Step4Record step4;
    Step5Record step5;
    int steps_completed = 0;
};

struct DecodedDomino {
    std::string numerator;
    std::string denominator;
};

struct GameTranscript {
    PcpInstance instance;
    Claim claim;
    GameConfig config;
    std::string physics;
    std::string strategy;
    std::int64_t boxes_per_domino = 0;
    std::vector<Message> messages;
    std::vector<DominoRecord> dominoes;
    std::vector<DecodedDomino> decoded;
    Verdict verdict = Verdict::lose;
    std::string failure_site;
};

/// The player's whole behavior: the claim she sends the referee, the devices
/// and boxes she supplies, and how she encodes each domino from the mixed
/// pool. Implementations must stay within physics: encode may only select,
/// measure and relabel boxes it was handed.
template <class P>
class PlayerStrategy {
public:
    virtual ~PlayerStrategy() = default;
    virtual std::string name() const = 0;
    virtual Claim claim(const PcpInstance& instance, const SearchBudget& solver, Sampler& rng) = 0;
    virtual DeviceSet<P> provide_devices() = 0;
    virtual Pool<P> provide_boxes(int domino_index, const Domino& domino, const StringProbability& k,
                                  const StringProbability& q, std::int64_t n, Mode mode,
                                  Sampler& rng) = 0;
    virtual Pool<P> encode(const Pool<P>& mixed, int domino_index, const Domino& domino,
                           const StringProbability& k, const StringProbability& q, Mode mode,
                           Sampler& rng) = 0;
};

/// Referee's final check of the claim against the decoded dominoes.
inline Verdict adjudicate(const Claim& claim, const std::vector<DecodedDomino>& decoded,
                          const SearchBudget& referee_budget, std::string& failure_site) {
    if (claim.arrangement) {
        std::string top, bottom;
        for (int idx : *claim.arrangement) {
            const auto& d = decoded.at(static_cast<std::size_t>(idx) - 1);
            top += d.numerator;
            bottom += d.denominator;
        }
        if (top == bottom) return Verdict::win;
        failure_site = kFailStep5Mismatch;
        return Verdict::lose;
    }
    PcpInstance decoded_instance;
    for (const auto& d : decoded) decoded_instance.dominoes.push_back({d.numerator, d.denominator});
    if (find_match(decoded_instance, referee_budget)) {
        failure_site = kFailNoMatchRefuted;
        return Verdict::lose;
    }
    return Verdict::win;
}

namespace detail {

inline std::optional<std::string> decode_frequency(const Rational& freq, unsigned max_digits) {
    if (freq <= 0 || freq >= Rational(1, 2)) return std::nullopt;
    const std::string s = probability_to_string(freq, max_digits);
    if (s.empty()) return std::nullopt;
    return s;
}

}  // namespace detail

/// Runs the five-step PPCG protocol of the rules table for one game. Exact
/// mode propagates distributions with rational weights and compares
/// probabilities exactly; sampled mode draws per-box outcomes group-wise and
/// applies the statistical tolerances.
template <class P>
class GameEngine {
public:
    using Box = typename P::Box;
    using Prob = typename P::Prob;

    GameEngine(PcpInstance instance, GameConfig config)
        : instance_(std::move(instance)), config_(config), sampler_(config.seed) {
        validate_instance(instance_);
        validate_config(config_);
        box_budget_ = required_boxes(instance_, config_);
        max_digits_ = static_cast<unsigned>(longest_string_length(instance_)) + 1;
    }

    std::int64_t box_budget() const { return box_budget_; }
    unsigned decode_digits() const { return max_digits_; }
    Sampler& sampler() { return sampler_; }
    const GameConfig& config() const { return config_; }

    struct Step1Outcome {
        bool pass = false;
        Pool<P> mixed;
    };

    /// Step 1: V1 verifies the devices on a half of the boxes (measure,
    /// remeasure for stability, mix, remeasure for uniformity, repeatedly),
    /// discards that half, then mixes and labels the surviving half.
    Step1Outcome step1_verify_devices(const Pool<P>& submitted, const DeviceSet<P>& dev,
                                      Step1Record& rec) {
        Step1Outcome out;
        rec.submitted = qty_repr(submitted.total());
        Pool<P> verify, keep;
        if (config_.mode == Mode::exact) {
            auto parts = submitted.split_fractions({Rational(1, 2), Rational(1, 2)});
            verify = std::move(parts[0]);
            keep = std::move(parts[1]);
        } else {
            const std::int64_t n = submitted.total_count();
            auto parts = submitted.split_counts({n / 2, n - n / 2});
            verify = std::move(parts[0]);
            keep = std::move(parts[1]);
        }
        rec.verified = qty_repr(verify.total());

        bool pass = true;
        if (config_.mode == Mode::exact) {
            for (const auto& g : verify.groups)
                if (g.qty > 0 && !exact_device_check(g.state, dev)) pass = false;
        } else {
            pass = sampled_device_check(verify, dev, rec);
        }

        for (const auto& g : keep.groups) out.mixed.add(dev.mix(g.state), Label::mixed, g.qty);
        rec.mixed = qty_repr(out.mixed.total());
        rec.pass = pass;
        out.pass = pass;
        return out;
    }

    /// Step 3: V1 tallies outcome counts of the encoded boxes, counting every
    /// "mixed" label as a quarter of each outcome, and requires
    /// n(hh) * n(tt) == n(ht) * n(th). Outcome-labeled boxes are remeasured so
    /// a label that misstates the box contents is a protocol violation (the
    /// classical no-cheat argument needs counts of outcomes, not claims).
    bool step3_count_check(const Pool<P>& encoded, const DeviceSet<P>& dev, Step3Record& rec) {
        std::array<Rational, 4> counts{Rational(0), Rational(0), Rational(0), Rational(0)};
        bool audit_ok = true;
        for (const auto& g : encoded.groups) {
            if (g.label == Label::unverified) {
                rec.pass = false;
                return false;
            }
            if (g.label == Label::mixed) {
                for (auto& c : counts) c += g.qty / 4;
                continue;
            }
            counts[static_cast<std::size_t>(outcome_for(g.label))] += g.qty;
            if (config_.mode == Mode::exact) {
                if (!exact_label_audit(g, dev)) audit_ok = false;
            } else {
                const std::int64_t n = group_count(g);
                const std::int64_t mismatches = sampled_label_mismatches(g, dev, n);
                rec.audit_samples += n;
                rec.audit_mismatches += mismatches;
                if (mismatches > 0) audit_ok = false;
            }
        }
        for (std::size_t i = 0; i < 4; ++i) rec.counts[i] = qty_repr(counts[i]);
        const Rational lhs = counts[0] * counts[3];
        const Rational rhs = counts[1] * counts[2];
        const Rational gap = lhs >= rhs ? lhs - rhs : rhs - lhs;
        rec.lhs = qty_repr(lhs);
        rec.rhs = qty_repr(rhs);
        rec.gap = qty_repr(gap);
        bool pass;
        if (config_.mode == Mode::exact) {
            rec.threshold = "0";
            pass = gap == 0;
        } else {
            const Rational total = encoded.total();
            const Rational threshold = rational_from_double(config_.tolerances.step3_eps) * total * total;
            rec.threshold = qty_repr(threshold);
            pass = gap <= threshold;
        }
        rec.pass = audit_ok && pass;
        return rec.pass;
    }

    struct Step4Outcome {
        bool pass = false;
        Side instruction = Side::left;
        Pool<P> forwarded;
    };

    /// Step 4: V2 measures left compartments of one random third and right
    /// compartments of a disjoint third (never both compartments of one box),
    /// compares the head frequencies against k_i and q_i, and forwards the
    /// untouched third with the decode instruction.
    Step4Outcome step4_encoding_check(const Pool<P>& encoded, const StringProbability& k,
                                      const StringProbability& q, const DeviceSet<P>& dev,
                                      Step4Record& rec) {
        Step4Outcome out;
        rec.expected_k = to_fraction_string(k.value);
        rec.expected_q = to_fraction_string(q.value);
        out.instruction = k.value <= q.value ? Side::left : Side::right;
        rec.instruction = out.instruction == Side::left ? "L" : "R";

        Pool<P> left_part, right_part;
        if (config_.mode == Mode::exact) {
            auto parts = encoded.split_fractions({Rational(1, 3), Rational(1, 3), Rational(1, 3)});
            left_part = std::move(parts[0]);
            right_part = std::move(parts[1]);
            out.forwarded = std::move(parts[2]);
        } else {
            const std::int64_t n = encoded.total_count();
            const std::int64_t third = n / 3;
            if (third == 0) {
                rec.pass = false;
                return out;
            }
            auto parts = encoded.split_counts({third, third, n - 2 * third});
            left_part = std::move(parts[0]);
            right_part = std::move(parts[1]);
            out.forwarded = std::move(parts[2]);
        }
        rec.checked_each = qty_repr(left_part.total());
        rec.forwarded = qty_repr(out.forwarded.total());
        if (left_part.empty() || right_part.empty()) {
            rec.pass = false;
            return out;
        }

        bool pass_left, pass_right;
        if (config_.mode == Mode::exact) {
            const Prob fl = pooled_head_probability(left_part, Side::left, dev);
            const Prob fr = pooled_head_probability(right_part, Side::right, dev);
            rec.left_frequency = P::repr(fl);
            rec.right_frequency = P::repr(fr);
            pass_left = P::probs_match(fl, P::from_rational(k.value));
            pass_right = P::probs_match(fr, P::from_rational(q.value));
        } else {
            const auto [lh, ln] = sampled_side_heads(left_part, Side::left, dev);
            const auto [rh, rn] = sampled_side_heads(right_part, Side::right, dev);
            rec.left_frequency = qty_repr(Rational(lh, ln));
            rec.right_frequency = qty_repr(Rational(rh, rn));
            const double eps = config_.tolerances.step4_eps;
            pass_left = std::abs(static_cast<double>(lh) / static_cast<double>(ln) -
                                 to_double(k.value)) <= eps;
            pass_right = std::abs(static_cast<double>(rh) / static_cast<double>(rn) -
                                  to_double(q.value)) <= eps;
        }
        out.pass = pass_left && pass_right;
        rec.pass = out.pass;
        return out;
    }

    struct Step5Outcome {
        bool ok = false;
        std::string first;
        std::string second;
    };

    /// Step 5: the referee measures the instructed compartment of every box,
    /// decodes the first string from the head frequency, discards the boxes
    /// that came up tails, then decodes the second string from the other
    /// compartment of the survivors.
    Step5Outcome step5_decode(const Pool<P>& boxes, Side instruction, const DeviceSet<P>& dev,
                              Step5Record& rec) {
        Step5Outcome out;
        rec.measured = qty_repr(boxes.total());
        const Side second_side = instruction == Side::left ? Side::right : Side::left;

        auto [first_freq, survivors] = measure_side(boxes, instruction, dev);
        if (!first_freq) {
            rec.decode_ok = false;
            return out;
        }
        rec.first_frequency = qty_repr(*first_freq);
        rec.survivors = qty_repr(survivors.total());
        const auto first = detail::decode_frequency(*first_freq, max_digits_);
        if (!first || survivors.empty()) {
            rec.decode_ok = false;
            return out;
        }

        auto [second_freq, rest] = measure_side(survivors, second_side, dev);
        (void)rest;
        if (!second_freq) {
            rec.decode_ok = false;
            return out;
        }
        rec.second_frequency = qty_repr(*second_freq);
        const auto second = detail::decode_frequency(*second_freq, max_digits_);
        if (!second) {
            rec.decode_ok = false;
            return out;
        }
        rec.first_string = *first;
        rec.second_string = *second;
        rec.decode_ok = true;
        out.ok = true;
        out.first = *first;
        out.second = *second;
        return out;
    }

    /// Plays the whole game: claim, then steps 1-5 per domino, then the
    /// referee's adjudication. Any failed verification short-circuits to a
    /// losing transcript with the failure site recorded.
    GameTranscript run(PlayerStrategy<P>& strategy) {
        sampler_ = Sampler(config_.seed);
        GameTranscript t;
        t.instance = instance_;
        t.config = config_;
        t.physics = P::name;
        t.strategy = strategy.name();
        t.boxes_per_domino = box_budget_;

        t.messages.push_back({"v2", "alice", "pcp-instance", 0, 0});
        t.claim = strategy.claim(instance_, config_.budgets.solver, sampler_);
        t.messages.push_back(
            {"alice", "referee", t.claim.arrangement ? "matching-order" : "no-match", 0, 0});
        if (t.claim.arrangement) {
            if (t.claim.arrangement->empty()) return lose(t, kFailClaimInvalid);
            for (int idx : *t.claim.arrangement)
                if (idx < 1 || idx > instance_.size()) return lose(t, kFailClaimInvalid);
        }

        const DeviceSet<P> devices = strategy.provide_devices();

        for (int i = 1; i <= instance_.size(); ++i) {
            const Domino& d = instance_.at(i);
            DominoRecord rec;
            rec.index = i;
            rec.numerator = d.numerator;
            rec.denominator = d.denominator;
            const StringProbability k = string_to_probability(d.numerator);
            const StringProbability q = string_to_probability(d.denominator);
            rec.k = to_fraction_string(k.value);
            rec.q = to_fraction_string(q.value);

            Pool<P> submitted =
                strategy.provide_boxes(i, d, k, q, box_budget_, config_.mode, sampler_);
            t.messages.push_back({"alice", "v1", "boxes+devices", i, 1});
            if (!submission_ok(submitted)) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep1);
            }

            auto s1 = step1_verify_devices(submitted, devices, rec.step1);
            rec.steps_completed = 1;
            if (!s1.pass) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep1);
            }

            t.messages.push_back({"v1", "alice", "mixed-boxes", i, 2});
            Pool<P> encoded = strategy.encode(s1.mixed, i, d, k, q, config_.mode, sampler_);
            rec.steps_completed = 2;
            if (!record_step2(s1.mixed, encoded, rec.step2)) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep2);
            }
            t.messages.push_back({"alice", "v1", "encoded-boxes", i, 3});

            const bool s3 = step3_count_check(encoded, devices, rec.step3);
            rec.steps_completed = 3;
            if (!s3) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep3);
            }
            // The single permitted V1 -> V2 hand-off.
            t.messages.push_back({"v1", "v2", "devices+encoded-boxes", i, 3});

            auto s4 = step4_encoding_check(encoded, k, q, devices, rec.step4);
            rec.steps_completed = 4;
            if (!s4.pass) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep4);
            }
            t.messages.push_back({"v2", "referee",
                                  s4.instruction == Side::left ? "boxes+instruction-L"
                                                               : "boxes+instruction-R",
                                  i, 4});

            auto s5 = step5_decode(s4.forwarded, s4.instruction, devices, rec.step5);
            rec.steps_completed = 5;
            if (!s5.ok) {
                t.dominoes.push_back(rec);
                return lose(t, kFailStep5Decode);
            }
            if (s4.instruction == Side::left)
                t.decoded.push_back({s5.first, s5.second});
            else
                t.decoded.push_back({s5.second, s5.first});
            t.dominoes.push_back(rec);
        }

        std::string site;
        t.verdict = adjudicate(t.claim, t.decoded, config_.budgets.referee, site);
        t.failure_site = site;
        return t;
    }

private:
    static GameTranscript lose(GameTranscript& t, const char* site) {
        t.verdict = Verdict::lose;
        t.failure_site = site;
        return std::move(t);
    }

    bool submission_ok(const Pool<P>& submitted) const {
        for (const auto& g : submitted.groups)
            if (g.label != Label::unverified) return false;
        if (config_.mode == Mode::exact) return submitted.total() == Rational(box_budget_);
        return submitted.total_count() == box_budget_;
    }

    bool record_step2(const Pool<P>& mixed, const Pool<P>& encoded, Step2Record& rec) {
        rec.mixed_in = qty_repr(mixed.total());
        rec.encoded = qty_repr(encoded.total());
        rec.discarded = qty_repr(mixed.total() - encoded.total());
        for (const auto& g : encoded.groups) {
            auto& slot = rec.labels[label_name(g.label)];
            const Rational prev = slot.empty() ? Rational(0) : Rational(slot);
            slot = qty_repr(prev + g.qty);
        }
        bool ok = true;
        for (const auto& g : encoded.groups) {
            if (g.label == Label::unverified) ok = false;
            if (g.qty < 0) ok = false;
        }
        // Exactly a quarter of the mixed pool.
        if (config_.mode == Mode::exact) {
            if (encoded.total() * 4 != mixed.total()) ok = false;
        } else {
            if (encoded.total_count() != mixed.total_count() / 4) ok = false;
        }
        rec.pass = ok;
        return ok;
    }

    static std::int64_t group_count(const BoxGroup<P>& g) { return to_int64(g.qty); }

    bool branch_feasible(const Prob& p) const {
        if constexpr (std::is_same_v<Prob, Rational>) return p > 0;
        else return p > kAmplitudeTolerance;
    }

    /// Exact-mode device verification: every measurement branch must be
    /// stable under remeasurement, and each mix/measure cycle must leave both
    /// compartments at head probability exactly one half.
    bool exact_device_check(const Box& initial, const DeviceSet<P>& dev) const {
        const Prob half = P::from_rational(Rational(1, 2));
        std::vector<Box> frontier{initial};
        for (int round = 0; round <= config_.step1_rounds; ++round) {
            std::vector<Box> collapsed;
            for (const Box& b : frontier) {
                const Prob pl = dev.head_probability(b, Side::left);
                for (CoinOutcome ol : {CoinOutcome::head, CoinOutcome::tail}) {
                    const Prob branch_l = ol == CoinOutcome::head ? pl : Prob(1) - pl;
                    if (!branch_feasible(branch_l)) continue;
                    const Box bl = dev.collapse(b, Side::left, ol);
                    const Prob repeat_l = dev.head_probability(bl, Side::left);
                    if (!P::probs_match(repeat_l, ol == CoinOutcome::head ? Prob(1) : Prob(0)))
                        return false;
                    const Prob pr = dev.head_probability(bl, Side::right);
                    for (CoinOutcome orr : {CoinOutcome::head, CoinOutcome::tail}) {
                        const Prob branch_r = orr == CoinOutcome::head ? pr : Prob(1) - pr;
                        if (!branch_feasible(branch_r)) continue;
                        const Box blr = dev.collapse(bl, Side::right, orr);
                        const Prob repeat_r = dev.head_probability(blr, Side::right);
                        if (!P::probs_match(repeat_r, orr == CoinOutcome::head ? Prob(1) : Prob(0)))
                            return false;
                        collapsed.push_back(blr);
                    }
                }
            }
            if (round == config_.step1_rounds) break;
            frontier.clear();
            for (const Box& b : collapsed) {
                const Box m = dev.mix(b);
                if (!P::probs_match(dev.head_probability(m, Side::left), half)) return false;
                if (!P::probs_match(dev.head_probability(m, Side::right), half)) return false;
                frontier.push_back(m);
            }
        }
        return true;
    }

    /// Sampled-mode device verification over the whole verification half.
    /// Round zero measures Alice's raw states (their statistics are hers to
    /// choose); later rounds measure freshly mixed boxes, whose pooled head
    /// count feeds a two-sided exact binomial test against one half.
    bool sampled_device_check(const Pool<P>& verify, const DeviceSet<P>& dev, Step1Record& rec) {
        struct Working {
            Box state;
            std::int64_t n;
        };
        std::vector<Working> current;
        for (const auto& g : verify.groups) current.push_back({g.state, group_count(g)});

        std::int64_t stab_samples = 0, stab_mismatches = 0;
        std::int64_t uni_samples = 0, uni_heads = 0;
        for (int round = 0; round <= config_.step1_rounds; ++round) {
            std::vector<Working> collapsed;
            for (const auto& w : current) {
                if (w.n == 0) continue;
                const double pl = P::to_sampling(dev.head_probability(w.state, Side::left));
                const std::int64_t n_lh = sampler_.binomial(w.n, pl);
                if (round >= 1) {
                    uni_samples += 2 * w.n;
                    uni_heads += n_lh;
                }
                const std::array<std::pair<CoinOutcome, std::int64_t>, 2> left_branches{
                    {{CoinOutcome::head, n_lh}, {CoinOutcome::tail, w.n - n_lh}}};
                for (const auto& [ol, nl] : left_branches) {
                    if (nl == 0) continue;
                    const Box bl = dev.collapse(w.state, Side::left, ol);
                    const double repeat =
                        P::to_sampling(dev.head_probability(bl, Side::left));
                    const double mismatch_p = ol == CoinOutcome::head ? 1.0 - repeat : repeat;
                    stab_samples += nl;
                    stab_mismatches += sampler_.binomial(nl, mismatch_p);
                    const double pr = P::to_sampling(dev.head_probability(bl, Side::right));
                    const std::int64_t n_rh = sampler_.binomial(nl, pr);
                    if (round >= 1) uni_heads += n_rh;
                    const std::array<std::pair<CoinOutcome, std::int64_t>, 2> right_branches{
                        {{CoinOutcome::head, n_rh}, {CoinOutcome::tail, nl - n_rh}}};
                    for (const auto& [orr, nr] : right_branches) {
                        if (nr == 0) continue;
                        const Box blr = dev.collapse(bl, Side::right, orr);
                        const double repeat_r =
                            P::to_sampling(dev.head_probability(blr, Side::right));
                        const double mismatch_r =
                            orr == CoinOutcome::head ? 1.0 - repeat_r : repeat_r;
                        stab_samples += nr;
                        stab_mismatches += sampler_.binomial(nr, mismatch_r);
                        collapsed.push_back({blr, nr});
                    }
                }
            }
            if (round == config_.step1_rounds) break;
            current.clear();
            for (const auto& w : collapsed) current.push_back({dev.mix(w.state), w.n});
        }
        rec.stability_samples = stab_samples;
        rec.stability_mismatches = stab_mismatches;
        rec.uniformity_samples = uni_samples;
        rec.uniformity_heads = uni_heads;
        rec.p_value =
            uni_samples > 0 ? binomial_two_sided_pvalue(uni_heads, uni_samples, 0.5) : 1.0;
        return stab_mismatches == 0 && rec.p_value >= config_.tolerances.step1_alpha;
    }

    bool exact_label_audit(const BoxGroup<P>& g, const DeviceSet<P>& dev) const {
        const JointOutcome o = outcome_for(g.label);
        const Prob pl = dev.head_probability(g.state, Side::left);
        const Prob want_l = left_of(o) == CoinOutcome::head ? Prob(1) : Prob(0);
        if (!P::probs_match(pl, want_l)) return false;
        const Box bl = dev.collapse(g.state, Side::left, left_of(o));
        const Prob pr = dev.head_probability(bl, Side::right);
        const Prob want_r = right_of(o) == CoinOutcome::head ? Prob(1) : Prob(0);
        return P::probs_match(pr, want_r);
    }

    std::int64_t sampled_label_mismatches(const BoxGroup<P>& g, const DeviceSet<P>& dev,
                                          std::int64_t n) {
        const JointOutcome o = outcome_for(g.label);
        const double pl = P::to_sampling(dev.head_probability(g.state, Side::left));
        const double p_left_match = left_of(o) == CoinOutcome::head ? pl : 1.0 - pl;
        const std::int64_t left_matched = sampler_.binomial(n, p_left_match);
        std::int64_t matched = 0;
        if (left_matched > 0) {
            const Box bl = dev.collapse(g.state, Side::left, left_of(o));
            const double pr = P::to_sampling(dev.head_probability(bl, Side::right));
            const double p_right_match = right_of(o) == CoinOutcome::head ? pr : 1.0 - pr;
            matched = sampler_.binomial(left_matched, p_right_match);
        }
        return n - matched;
    }

    std::pair<std::int64_t, std::int64_t> sampled_side_heads(const Pool<P>& pool, Side side,
                                                             const DeviceSet<P>& dev) {
        std::int64_t heads = 0, n = 0;
        for (const auto& g : pool.groups) {
            const std::int64_t c = group_count(g);
            heads += sampler_.binomial(c, P::to_sampling(dev.head_probability(g.state, side)));
            n += c;
        }
        return {heads, n};
    }

    /// Measures one side of every box. Returns the pooled head frequency as
    /// an exact rational plus the pool of head-outcome survivors (collapsed).
    std::pair<std::optional<Rational>, Pool<P>> measure_side(const Pool<P>& pool, Side side,
                                                             const DeviceSet<P>& dev) {
        Pool<P> survivors;
        if (config_.mode == Mode::exact) {
            const Rational total = pool.total();
            if (total == 0) return {std::nullopt, survivors};
            Prob freq{};
            for (const auto& g : pool.groups) {
                const Prob p = dev.head_probability(g.state, side);
                freq += p * P::from_rational(g.qty / total);
                if (branch_feasible(p)) {
                    const Rational weight = g.qty * P::to_rational(p);
                    survivors.add(dev.collapse(g.state, side, CoinOutcome::head), g.label, weight);
                }
            }
            return {P::to_rational(freq), std::move(survivors)};
        }
        std::int64_t heads = 0, n = 0;
        for (const auto& g : pool.groups) {
            const std::int64_t c = group_count(g);
            const std::int64_t h =
                sampler_.binomial(c, P::to_sampling(dev.head_probability(g.state, side)));
            heads += h;
            n += c;
            if (h > 0)
                survivors.add(dev.collapse(g.state, side, CoinOutcome::head), g.label, Rational(h));
        }
        if (n == 0) return {std::nullopt, survivors};
        return {Rational(heads, n), std::move(survivors)};
    }

    PcpInstance instance_;
    GameConfig config_;
    Sampler sampler_;
    std::int64_t box_budget_ = 0;
    unsigned max_digits_ = 0;
};

}  // namespace ppcg
