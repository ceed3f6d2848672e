#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppcg/pcp.hpp"

namespace ppcg {

/// A physical theory, abstracted to its question-answering behavior: the
/// truth value it assigns to each distinguishing statement. Two theories are
/// distinct iff some statement maps to different booleans.
struct Theory {
    std::string name;
    std::map<std::string, bool> truth;

    bool q(const std::string& statement) const {
        const auto it = truth.find(statement);
        if (it == truth.end())
            throw std::out_of_range("theory \"" + name + "\" has no valuation for statement \"" +
                                    statement + "\"");
        return it->second;
    }
};

inline bool theories_distinct(const Theory& a, const Theory& b) {
    for (const auto& [statement, value] : a.truth) {
        const auto it = b.truth.find(statement);
        if (it != b.truth.end() && it->second != value) return true;
    }
    return false;
}

enum class Decidability { trivially_decidable, nontrivially_decidable, proxy_undecidable };

inline std::string decidability_name(Decidability d) {
    switch (d) {
        case Decidability::trivially_decidable: return "trivially-decidable";
        case Decidability::nontrivially_decidable: return "nontrivially-decidable";
        case Decidability::proxy_undecidable: return "proxy-undecidable";
    }
    throw std::logic_error("bad decidability flag");
}

/// An instance-indexed decision problem whose answers may depend on the
/// theory evaluating it. `flag` records the family's modeling role: the
/// halting stand-in is only proxy-undecidable (a budgeted search), since true
/// undecidability is not desk-testable.
struct ProblemFamily {
    std::string name;
    Decidability flag = Decidability::proxy_undecidable;
    int index_count = 0;
    std::function<bool(const Theory&, int)> eval;

    bool evaluate(const Theory& t, int i) const {
        if (i < 0 || i >= index_count)
            throw std::out_of_range("family \"" + name + "\": index " + std::to_string(i) +
                                    " outside 0.." + std::to_string(index_count - 1));
        return eval(t, i);
    }
};

/// Surjection from instance indices onto a target index range.
struct IndexMap {
    int domain = 0;
    int codomain = 0;
    std::function<int(int)> map;

    int apply(int i) const {
        if (i < 0 || i >= domain) throw std::out_of_range("index map: input out of range");
        const int v = map(i);
        if (v < 0 || v >= codomain) throw std::out_of_range("index map: image out of range");
        return v;
    }

    void validate_surjective() const {
        std::set<int> image;
        for (int i = 0; i < domain; ++i) image.insert(apply(i));
        if (static_cast<int>(image.size()) != codomain)
            throw std::invalid_argument("index map is not surjective onto its codomain");
    }
};

inline IndexMap identity_map(int n) {
    return IndexMap{n, n, [](int i) { return i; }};
}

inline IndexMap mod_map(int domain, int codomain) {
    if (codomain < 1 || domain < codomain)
        throw std::invalid_argument("mod map needs domain >= codomain >= 1");
    return IndexMap{domain, codomain, [codomain](int i) { return i % codomain; }};
}

inline IndexMap constant_map(int domain, int value, int codomain) {
    return IndexMap{domain, codomain, [value](int) { return value; }};
}

/// D_i := Q or H_i. Trivially decidable wherever Q holds; collapses to H
/// wherever Q fails.
inline ProblemFamily construct_D(std::string q_id, ProblemFamily H) {
    ProblemFamily d;
    d.name = "D[" + q_id + " or " + H.name + "]";
    d.flag = Decidability::trivially_decidable;
    d.index_count = H.index_count;
    d.eval = [q_id = std::move(q_id), H = std::move(H)](const Theory& t, int i) {
        if (t.q(q_id)) return true;
        return H.evaluate(t, i);
    };
    return d;
}

/// D~_i := not Q or H_i, the role-swapped construction.
inline ProblemFamily construct_D_tilde(std::string q_id, ProblemFamily H) {
    ProblemFamily d;
    d.name = "D~[not " + q_id + " or " + H.name + "]";
    d.flag = Decidability::trivially_decidable;
    d.index_count = H.index_count;
    d.eval = [q_id = std::move(q_id), H = std::move(H)](const Theory& t, int i) {
        if (!t.q(q_id)) return true;
        return H.evaluate(t, i);
    };
    return d;
}

/// D_i[f] := (not Q and H_i) or (Q and H_f(i)). Under a Q-false theory this
/// is extensionally H; under a Q-true theory it is H composed with f, a
/// non-trivially decidable subset when f picks one.
inline ProblemFamily construct_D_f(std::string q_id, ProblemFamily H, IndexMap f) {
    if (f.domain != H.index_count || f.codomain > H.index_count)
        throw std::invalid_argument("index map does not fit the family's index range");
    ProblemFamily d;
    d.name = "D[f][" + q_id + ", " + H.name + "]";
    d.flag = Decidability::nontrivially_decidable;
    d.index_count = H.index_count;
    d.eval = [q_id = std::move(q_id), H = std::move(H), f = std::move(f)](const Theory& t, int i) {
        if (t.q(q_id)) return H.evaluate(t, f.apply(i));
        return H.evaluate(t, i);
    };
    return d;
}

/// The bounded stand-in for the halting family: H_i asks whether the i-th
/// corpus instance has a match found within the budget. Theory-independent.
inline ProblemFamily bounded_pcp_proxy(std::vector<PcpInstance> corpus, SearchBudget budget) {
    ProblemFamily h;
    h.name = "bounded-pcp-match";
    h.flag = Decidability::proxy_undecidable;
    h.index_count = static_cast<int>(corpus.size());
    h.eval = [corpus = std::move(corpus), budget](const Theory&, int i) {
        return find_match(corpus[static_cast<std::size_t>(i)], budget).has_value();
    };
    return h;
}

/// Seeded corpus of small instances for the proxy family.
inline std::vector<PcpInstance> proxy_corpus(int count, std::uint64_t seed) {
    std::vector<PcpInstance> corpus;
    corpus.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        corpus.push_back(random_instance({2, 2, false}, seed + static_cast<std::uint64_t>(i)));
    return corpus;
}

}  // namespace ppcg
