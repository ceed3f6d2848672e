#pragma once

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace ppcg {

/// Two-sided exact binomial test of H0: success probability == p0,
/// given `successes` out of `trials`. Returns the p-value.
inline double binomial_two_sided_pvalue(std::int64_t successes, std::int64_t trials, double p0) {
    if (trials <= 0) throw std::invalid_argument("binomial test: trials must be positive");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("binomial test: successes out of range");
    const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), p0);
    const double lower = cdf(dist, static_cast<double>(successes));
    const double upper =
        successes == 0 ? 1.0 : cdf(complement(dist, static_cast<double>(successes) - 1.0));
    // Doubling the smaller tail is exact for p0 = 1/2 and conservative otherwise.
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Clopper-Pearson exact interval for a binomial proportion.
inline ConfidenceInterval clopper_pearson(std::int64_t successes, std::int64_t trials,
                                          double confidence = 0.95) {
    if (trials <= 0) throw std::invalid_argument("clopper_pearson: trials must be positive");
    const double alpha = 1.0 - confidence;
    using boost::math::binomial_distribution;
    ConfidenceInterval ci;
    ci.lower = binomial_distribution<double>::find_lower_bound_on_p(
        static_cast<double>(trials), static_cast<double>(successes), alpha / 2);
    ci.upper = binomial_distribution<double>::find_upper_bound_on_p(
        static_cast<double>(trials), static_cast<double>(successes), alpha / 2);
    return ci;
}

}  // namespace ppcg
