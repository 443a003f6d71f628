#pragma once

#include <cmath>
#include <cstdint>

namespace fdrelay {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for a binomial proportion. z defaults to the
/// two-sided 95% normal quantile.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963985) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {center - half, center + half};
}

/// True when the two 95% intervals do not overlap (a < b strictly).
inline bool wilson_separated_below(std::uint64_t err_a, std::uint64_t n_a, std::uint64_t err_b,
                                   std::uint64_t n_b) {
    return wilson_interval(err_a, n_a).hi < wilson_interval(err_b, n_b).lo;
}

}  // namespace fdrelay
