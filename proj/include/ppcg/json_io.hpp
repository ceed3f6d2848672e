#pragma once

#include <json.hpp>

#include "ppcg/protocol.hpp"

namespace ppcg {

/// Transcripts and reports use ordered JSON so that reruns with the same seed
/// serialize byte-identically.
using Json = nlohmann::ordered_json;

inline Json instance_to_json(const PcpInstance& inst) {
    Json arr = Json::array();
    for (const auto& d : inst.dominoes)
        arr.push_back(Json{{"numerator", d.numerator}, {"denominator", d.denominator}});
    return arr;
}

inline Json claim_to_json(const Claim& claim) {
    if (!claim.arrangement) return Json{{"type", "no-match"}};
    return Json{{"type", "arrangement"}, {"indices", *claim.arrangement}};
}

inline Json config_to_json(const GameConfig& cfg) {
    return Json{
        {"mode", mode_name(cfg.mode)},
        {"seed", cfg.seed},
        {"n_constant", cfg.n_constant},
        {"step1_rounds", cfg.step1_rounds},
        {"tolerances",
         Json{{"step1_alpha", cfg.tolerances.step1_alpha},
              {"step3_eps", cfg.tolerances.step3_eps},
              {"step4_eps", cfg.tolerances.step4_eps}}},
        {"budgets",
         Json{{"solver", Json{{"max_expansions", cfg.budgets.solver.max_expansions},
                              {"max_length", cfg.budgets.solver.max_length}}},
              {"referee", Json{{"max_expansions", cfg.budgets.referee.max_expansions},
                               {"max_length", cfg.budgets.referee.max_length}}}}},
    };
}

inline Json transcript_to_json(const GameTranscript& t) {
    Json j;
    j["schema"] = "ppcg.transcript.v1";
    j["strategy"] = t.strategy;
    j["physics"] = t.physics;
    j["config"] = config_to_json(t.config);
    j["instance"] = instance_to_json(t.instance);
    j["claim"] = claim_to_json(t.claim);
    j["boxes_per_domino"] = t.boxes_per_domino;

    Json messages = Json::array();
    for (const auto& m : t.messages)
        messages.push_back(Json{
            {"from", m.from}, {"to", m.to}, {"what", m.what}, {"domino", m.domino}, {"step", m.step}});
    j["messages"] = messages;

    Json dominoes = Json::array();
    for (const auto& d : t.dominoes) {
        Json rec;
        rec["index"] = d.index;
        rec["numerator"] = d.numerator;
        rec["denominator"] = d.denominator;
        rec["k"] = d.k;
        rec["q"] = d.q;
        rec["steps_completed"] = d.steps_completed;
        rec["step1"] = Json{{"submitted", d.step1.submitted},
                            {"verified", d.step1.verified},
                            {"mixed", d.step1.mixed},
                            {"stability_samples", d.step1.stability_samples},
                            {"stability_mismatches", d.step1.stability_mismatches},
                            {"uniformity_samples", d.step1.uniformity_samples},
                            {"uniformity_heads", d.step1.uniformity_heads},
                            {"p_value", d.step1.p_value},
                            {"pass", d.step1.pass}};
        if (d.steps_completed >= 2) {
            Json labels;
            for (const auto& [name, qty] : d.step2.labels) labels[name] = qty;
            rec["step2"] = Json{{"mixed_in", d.step2.mixed_in},
                                {"encoded", d.step2.encoded},
                                {"discarded", d.step2.discarded},
                                {"labels", labels},
                                {"pass", d.step2.pass}};
        }
        if (d.steps_completed >= 3)
            rec["step3"] = Json{{"count_hh", d.step3.counts[0]},
                                {"count_ht", d.step3.counts[1]},
                                {"count_th", d.step3.counts[2]},
                                {"count_tt", d.step3.counts[3]},
                                {"lhs", d.step3.lhs},
                                {"rhs", d.step3.rhs},
                                {"gap", d.step3.gap},
                                {"threshold", d.step3.threshold},
                                {"audit_samples", d.step3.audit_samples},
                                {"audit_mismatches", d.step3.audit_mismatches},
                                {"pass", d.step3.pass}};
        if (d.steps_completed >= 4)
            rec["step4"] = Json{{"checked_each", d.step4.checked_each},
                                {"forwarded", d.step4.forwarded},
                                {"left_frequency", d.step4.left_frequency},
                                {"right_frequency", d.step4.right_frequency},
                                {"expected_k", d.step4.expected_k},
                                {"expected_q", d.step4.expected_q},
                                {"instruction", d.step4.instruction},
                                {"pass", d.step4.pass}};
        if (d.steps_completed >= 5)
            rec["step5"] = Json{{"measured", d.step5.measured},
                                {"survivors", d.step5.survivors},
                                {"first_frequency", d.step5.first_frequency},
                                {"second_frequency", d.step5.second_frequency},
                                {"first_string", d.step5.first_string},
                                {"second_string", d.step5.second_string},
                                {"decode_ok", d.step5.decode_ok}};
        dominoes.push_back(rec);
    }
    j["per_domino"] = dominoes;

    Json decoded = Json::array();
    for (const auto& d : t.decoded)
        decoded.push_back(Json{{"numerator", d.numerator}, {"denominator", d.denominator}});
    j["decoded"] = decoded;
    j["verdict"] = verdict_name(t.verdict);
    j["failure_site"] = t.failure_site;
    j["seed"] = t.config.seed;
    return j;
}

}  // namespace ppcg
