#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppcg/json_io.hpp"
#include "ppcg/protocol.hpp"
#include "ppcg/stats.hpp"
#include "ppcg/strategies.hpp"

namespace ppcg {

inline const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names{"classical-honest", "classical-cheat",
                                                "quantum-cheat"};
    return names;
}

/// Runs one game with a fresh strategy instance selected by name.
inline GameTranscript run_game_by_name(const PcpInstance& instance, const std::string& strategy,
                                       const GameConfig& config) {
    if (strategy == "classical-honest") {
        auto s = make_classical_honest();
        return GameEngine<ClassicalPhysics>(instance, config).run(*s);
    }
    if (strategy == "classical-cheat") {
        auto s = make_classical_cheat();
        return GameEngine<ClassicalPhysics>(instance, config).run(*s);
    }
    if (strategy == "quantum-cheat") {
        auto s = make_quantum_cheat();
        return GameEngine<QuantumPhysics>(instance, config).run(*s);
    }
    throw std::invalid_argument(
        "unknown strategy \"" + strategy +
        "\" (expected classical-honest, classical-cheat or quantum-cheat)");
}

struct RunOutcome {
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::lose;
    std::string failure_site;
};

struct ExperimentReport {
    std::string strategy;
    PcpInstance instance;
    GameConfig base_config;
    std::uint64_t base_seed = 0;
    int runs = 0;
    std::vector<RunOutcome> outcomes;
    std::int64_t wins = 0;
    double win_rate = 0.0;
    std::string win_rate_exact;
    ConfidenceInterval ci95;
    std::map<std::string, int> failure_histogram;
    std::vector<double> never_lose;  // estimated never-lose probability over r rounds
};

/// Monte-Carlo win-rate experiment: `runs` independent games seeded
/// base_seed, base_seed+1, ... Games share nothing, so run order is
/// immaterial; the report is keyed by seed.
inline ExperimentReport run_experiment(const PcpInstance& instance, const std::string& strategy,
                                       int runs, std::uint64_t base_seed, GameConfig config) {
    if (runs < 1) throw std::invalid_argument("experiment needs at least one run");
    ExperimentReport report;
    report.strategy = strategy;
    report.instance = instance;
    report.base_config = config;
    report.base_seed = base_seed;
    report.runs = runs;

    for (int r = 0; r < runs; ++r) {
        config.seed = base_seed + static_cast<std::uint64_t>(r);
        const GameTranscript t = run_game_by_name(instance, strategy, config);
        report.outcomes.push_back({config.seed, t.verdict, t.failure_site});
        if (t.verdict == Verdict::win)
            ++report.wins;
        else
            ++report.failure_histogram[t.failure_site.empty() ? "unrecorded" : t.failure_site];
    }
    report.win_rate = static_cast<double>(report.wins) / static_cast<double>(runs);
    report.win_rate_exact = qty_repr(Rational(report.wins, runs));
    report.ci95 = clopper_pearson(report.wins, runs);
    report.never_lose.reserve(static_cast<std::size_t>(runs));
    double acc = 1.0;
    for (int r = 1; r <= runs; ++r) {
        acc *= report.win_rate;
        report.never_lose.push_back(acc);
    }
    return report;
}

inline Json report_to_json(const ExperimentReport& r) {
    Json j;
    j["schema"] = "ppcg.experiment.v1";
    j["strategy"] = r.strategy;
    j["instance"] = instance_to_json(r.instance);
    j["config"] = config_to_json(r.base_config);
    j["base_seed"] = r.base_seed;
    j["runs"] = r.runs;
    // Seed-per-run derivation is sequential from base_seed for auditability.
    Json outcomes = Json::array();
    for (const auto& o : r.outcomes)
        outcomes.push_back(Json{{"seed", o.seed},
                                {"verdict", verdict_name(o.verdict)},
                                {"failure_site", o.failure_site}});
    j["outcomes"] = outcomes;
    j["wins"] = r.wins;
    j["win_rate"] = r.win_rate;
    j["win_rate_exact"] = r.win_rate_exact;
    j["ci95"] = Json{{"lower", r.ci95.lower}, {"upper", r.ci95.upper}};
    Json hist;
    for (const auto& [site, n] : r.failure_histogram) hist[site] = n;
    j["failure_histogram"] = hist;
    j["never_lose"] = r.never_lose;
    return j;
}

}  // namespace ppcg
