#pragma once

// Small statistics helpers shared by the Monte Carlo tests.

#include <algorithm>
#include <cmath>
#include <vector>

namespace stats {

/// Kolmogorov-Smirnov distance between a sample and Uniform[lo, hi).
inline double ks_uniform(std::vector<double> xs, double lo, double hi) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = (xs[i] - lo) / (hi - lo);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

/// KS distance between a sample and a distribution given by its CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

/// Critical KS distance at the 0.1% level for large n.
inline double ks_critical_001(std::size_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

/// Binomial standard error of a proportion.
inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace stats
