#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ppcg/rational.hpp"
#include "ppcg/sampling.hpp"

namespace ppcg {

/// A domino: pair of digit strings over the alphabet {1,2,3,4}.
struct Domino {
    std::string numerator;
    std::string denominator;

    friend bool operator==(const Domino&, const Domino&) = default;
};

/// A PCP instance. Dominoes are named A1, A2, ... and indexed from 1.
struct PcpInstance {
    std::vector<Domino> dominoes;

    const Domino& at(int index_1based) const {
        if (index_1based < 1 || index_1based > static_cast<int>(dominoes.size()))
            throw std::out_of_range("domino index " + std::to_string(index_1based) +
                                    " out of range 1.." + std::to_string(dominoes.size()));
        return dominoes[static_cast<std::size_t>(index_1based - 1)];
    }
    int size() const { return static_cast<int>(dominoes.size()); }

    friend bool operator==(const PcpInstance&, const PcpInstance&) = default;
};

/// A proposed matching order: domino indices (1-based, repetition allowed).
using Arrangement = std::vector<int>;

struct InvalidDigitError : std::invalid_argument {
    InvalidDigitError(char c, std::size_t position)
        : std::invalid_argument("invalid character '" + std::string(1, c) +
                                "' at position " + std::to_string(position) +
                                " (expected one of 1,2,3,4)"),
          character(c),
          position(position) {}
    char character;
    std::size_t position;  // 0-based within the string
};

inline void validate_domino_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("domino string must be nonempty");
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] < '1' || s[i] > '4') throw InvalidDigitError(s[i], i);
}

inline void validate_instance(const PcpInstance& inst) {
    if (inst.dominoes.empty()) throw std::invalid_argument("instance must have at least one domino");
    for (const auto& d : inst.dominoes) {
        validate_domino_string(d.numerator);
        validate_domino_string(d.denominator);
    }
}

/// The probability value 0.d1d2...dn of a domino string, kept exact.
struct StringProbability {
    Rational value;
    std::string digits;
};

/// "121" -> 0.121 exactly. Rejects anything outside the {1,2,3,4} alphabet.
inline StringProbability string_to_probability(const std::string& s) {
    validate_domino_string(s);
    Rational v(0);
    Rational place(1, 10);
    for (char c : s) {
        v += Rational(c - '0') * place;
        place /= 10;
    }
    return StringProbability{v, s};
}

/// Reads the decimal digits of p rounded to max_digits places and returns the
/// prefix strictly before the first '0' digit. Inverse of string_to_probability
/// whenever p is exact and max_digits exceeds the string length.
inline std::string probability_to_string(const Rational& p, unsigned max_digits) {
    if (max_digits < 1) throw std::invalid_argument("max_digits must be >= 1");
    if (p <= 0 || p >= Rational(1, 2))
        throw std::domain_error("probability_to_string: value outside (0, 0.5)");
    const std::string digits = decimal_digits(p, max_digits);
    const auto zero = digits.find('0');
    return zero == std::string::npos ? digits : digits.substr(0, zero);
}

inline std::string probability_to_string(double p, unsigned max_digits) {
    return probability_to_string(rational_from_double(p), max_digits);
}

/// True iff the concatenated numerators equal the concatenated denominators
/// along the arrangement.
inline bool check_arrangement(const PcpInstance& inst, const Arrangement& arr) {
    if (arr.empty()) throw std::invalid_argument("arrangement must be nonempty");
    std::string top, bottom;
    for (int idx : arr) {
        const Domino& d = inst.at(idx);
        top += d.numerator;
        bottom += d.denominator;
    }
    return top == bottom;
}

/// Search budget for find_match. Exhaustion is a normal result, not an error:
/// PCP is undecidable, so "no match within budget" never claims nonexistence.
struct SearchBudget {
    std::int64_t max_expansions = 100000;
    int max_length = 32;
};

namespace detail {

// BFS node over prefix-difference states. `top_ahead` tells which side owns
// the unmatched residue.
struct MatchNode {
    bool top_ahead;
    std::string residue;
    int parent;
    int tile;  // 1-based tile appended to reach this node
    int depth;
};

inline Arrangement reconstruct(const std::vector<MatchNode>& arena, int leaf_parent, int leaf_tile) {
    Arrangement arr;
    arr.push_back(leaf_tile);
    for (int i = leaf_parent; i >= 0; i = arena[static_cast<std::size_t>(i)].parent)
        arr.push_back(arena[static_cast<std::size_t>(i)].tile);
    std::reverse(arr.begin(), arr.end());
    return arr;
}

}  // namespace detail

/// Breadth-first search over prefix-difference states with a visited set.
/// Returns an arrangement satisfying check_arrangement, or nullopt when the
/// budget runs out first. Deterministic for a fixed instance and budget.
inline std::optional<Arrangement> find_match(const PcpInstance& inst, const SearchBudget& budget) {
    if (inst.dominoes.empty()) throw std::invalid_argument("instance must have at least one domino");
    if (budget.max_expansions <= 0 || budget.max_length <= 0)
        throw std::invalid_argument("search budget must be positive");

    // If every domino tilts the same side strictly, lengths can never equalize.
    bool all_top_longer = true, all_bottom_longer = true;
    for (const auto& d : inst.dominoes) {
        if (d.numerator.size() <= d.denominator.size()) all_top_longer = false;
        if (d.denominator.size() <= d.numerator.size()) all_bottom_longer = false;
    }
    if (all_top_longer || all_bottom_longer) return std::nullopt;

    std::vector<detail::MatchNode> arena;
    std::deque<int> queue;
    std::unordered_set<std::string> visited;
    const int m = inst.size();

    auto offer = [&](bool top_ahead, std::string residue, int parent, int tile, int depth) {
        std::string key = (top_ahead ? "T" : "B") + residue;
        if (!visited.insert(std::move(key)).second) return;
        arena.push_back({top_ahead, std::move(residue), parent, tile, depth});
        queue.push_back(static_cast<int>(arena.size()) - 1);
    };

    for (int i = 1; i <= m; ++i) {
        const Domino& d = inst.at(i);
        if (d.numerator == d.denominator) return Arrangement{i};
        if (d.numerator.starts_with(d.denominator))
            offer(true, d.numerator.substr(d.denominator.size()), -1, i, 1);
        else if (d.denominator.starts_with(d.numerator))
            offer(false, d.denominator.substr(d.numerator.size()), -1, i, 1);
    }

    std::int64_t expansions = 0;
    while (!queue.empty()) {
        if (++expansions > budget.max_expansions) return std::nullopt;
        const int node_id = queue.front();
        queue.pop_front();
        // Copy: offer() may grow the arena and invalidate references.
        const detail::MatchNode node = arena[static_cast<std::size_t>(node_id)];
        if (node.depth >= budget.max_length) continue;

        for (int i = 1; i <= m; ++i) {
            const Domino& d = inst.at(i);
            // The side that is ahead extends its residue; the other side must
            // match it prefix-wise.
            const std::string ahead = node.residue + (node.top_ahead ? d.numerator : d.denominator);
            const std::string& behind = node.top_ahead ? d.denominator : d.numerator;
            if (ahead == behind) return detail::reconstruct(arena, node_id, i);
            if (ahead.starts_with(behind))
                offer(node.top_ahead, ahead.substr(behind.size()), node_id, i, node.depth + 1);
            else if (behind.starts_with(ahead))
                offer(!node.top_ahead, behind.substr(ahead.size()), node_id, i, node.depth + 1);
        }
    }
    return std::nullopt;
}

struct InstanceParams {
    int num_dominoes = 3;
    int max_string_len = 3;
    bool ensure_nontrivial = true;
};

/// Seeded random instance: string lengths uniform on 1..max_string_len,
/// digits uniform on {1,2,3,4}. With ensure_nontrivial no domino has equal
/// numerator and denominator (rejection sampling).
inline PcpInstance random_instance(const InstanceParams& params, std::uint64_t seed) {
    if (params.num_dominoes < 1 || params.max_string_len < 1)
        throw std::invalid_argument("instance parameters must be positive");
    Sampler sampler(seed);
    auto random_string = [&] {
        const auto len = 1 + sampler.uniform_index(static_cast<std::uint64_t>(params.max_string_len));
        std::string s;
        for (std::uint64_t i = 0; i < len; ++i)
            s.push_back(static_cast<char>('1' + sampler.uniform_index(4)));
        return s;
    };
    PcpInstance inst;
    for (int i = 0; i < params.num_dominoes; ++i) {
        Domino d;
        int attempts = 0;
        do {
            if (++attempts > 10000)
                throw std::invalid_argument("random_instance: constraints cannot be satisfied");
            d.numerator = random_string();
            d.denominator = random_string();
        } while (params.ensure_nontrivial && d.numerator == d.denominator);
        inst.dominoes.push_back(std::move(d));
    }
    return inst;
}

struct ParseError : std::runtime_error {
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

/// Instance file format: one "numerator/denominator" per line, '#' starts a
/// comment line, blank lines ignored.
inline PcpInstance parse_instance(const std::string& text) {
    PcpInstance inst;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto slash = t.find('/');
        if (slash == std::string::npos) throw ParseError(lineno, "expected \"numerator/denominator\"");
        if (t.find('/', slash + 1) != std::string::npos)
            throw ParseError(lineno, "more than one '/' separator");
        Domino d{trim(t.substr(0, slash)), trim(t.substr(slash + 1))};
        try {
            validate_domino_string(d.numerator);
            validate_domino_string(d.denominator);
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, e.what());
        }
        inst.dominoes.push_back(std::move(d));
    }
    if (inst.dominoes.empty()) throw ParseError(lineno, "no dominoes in file");
    return inst;
}

inline std::string serialize_instance(const PcpInstance& inst) {
    std::string out;
    for (const auto& d : inst.dominoes) {
        out += d.numerator;
        out += '/';
        out += d.denominator;
        out += '\n';
    }
    return out;
}

/// Length of the longest string in the instance (the l_max of box budgeting).
inline int longest_string_length(const PcpInstance& inst) {
    std::size_t l = 0;
    for (const auto& d : inst.dominoes) l = std::max({l, d.numerator.size(), d.denominator.size()});
    return static_cast<int>(l);
}

/// Smallest string probability over all numerators and denominators.
inline Rational min_string_probability(const PcpInstance& inst) {
    Rational m(1);
    for (const auto& d : inst.dominoes) {
        m = std::min(m, string_to_probability(d.numerator).value);
        m = std::min(m, string_to_probability(d.denominator).value);
    }
    return m;
}

}  // namespace ppcg
