#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ppcg {

/// Exact rational arithmetic used for all classical probabilities and box
/// bookkeeping. Arbitrary precision so decimal string probabilities and
/// their products never overflow or round.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline BigInt pow10(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 0; i < n; ++i) r *= 10;
    return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// The integer value of a whole rational (counts in sampled mode).
inline std::int64_t to_int64(const Rational& r) {
    if (denominator(r) != 1) throw std::logic_error("expected an integer-valued rational");
    return numerator(r).convert_to<std::int64_t>();
}

/// Exact rational equal to the given double (binary expansion, no rounding).
inline Rational rational_from_double(double x) { return Rational(x); }

/// Rounds v to `digits` decimal places and returns the scaled integer
/// round(v * 10^digits). Ties round away from zero.
inline BigInt round_scaled(const Rational& v, unsigned digits) {
    const Rational scaled = v * Rational(pow10(digits));
    const BigInt num = numerator(scaled);
    const BigInt den = denominator(scaled);
    if (num >= 0) return (2 * num + den) / (2 * den);
    return -((2 * -num + den) / (2 * den));
}

/// Decimal digits d1..dn of v rounded to n places, zero padded on the left.
/// Requires 0 <= v < 1 after rounding.
inline std::string decimal_digits(const Rational& v, unsigned digits) {
    const BigInt scaled = round_scaled(v, digits);
    if (scaled < 0 || scaled >= pow10(digits))
        throw std::domain_error("decimal_digits: value not in [0,1) at requested precision");
    std::string s = scaled.convert_to<std::string>();
    if (s.size() < digits) s.insert(s.begin(), digits - s.size(), '0');
    return s;
}

inline std::string to_fraction_string(const Rational& r) {
    return numerator(r).convert_to<std::string>() + "/" + denominator(r).convert_to<std::string>();
}

/// Compact representation for counts and weights: plain integer when whole,
/// "p/q" otherwise.
inline std::string qty_repr(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).convert_to<std::string>();
    return to_fraction_string(r);
}

}  // namespace ppcg
