#pragma once

// Shared statistical helpers for the test suites: Kolmogorov-Smirnov tests,
// normal CDF, composite Simpson quadrature for oracle integrals, and exact
// Rademacher enumeration. Deliberately independent of the library's own
// numerics so they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace testutil {

inline double normal_cdf(double x, double sd) {
    return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0)));
}

/// Asymptotic Kolmogorov distribution tail Q(lambda) with the usual
/// small-sample correction; returns the p-value for statistic d at
/// effective sample size n_eff.
inline double ks_pvalue(double d, double n_eff) {
    const double sq = std::sqrt(n_eff);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * static_cast<double>(j) * j * lambda * lambda);
        sum += (j % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-14) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_test_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return ks_pvalue(d, n);
}

inline double ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return ks_pvalue(d, na * nb / (na + nb));
}

/// Composite Simpson on [a, b]; intervals is rounded up to an even count.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t intervals = 4096) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < intervals; ++i)
        sum += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Exact E|sum_k r_k h_k|^p by enumeration of all 2^len sign patterns.
inline double khintchine_enumerate(const std::vector<double>& h, double p) {
    const std::size_t len = h.size();
    const std::size_t patterns = std::size_t{1} << len;
    double total = 0.0;
    for (std::size_t mask = 0; mask < patterns; ++mask) {
        double s = 0.0;
        for (std::size_t k = 0; k < len; ++k) s += (mask & (std::size_t{1} << k)) ? h[k] : -h[k];
        total += std::pow(std::abs(s), p);
    }
    return total / static_cast<double>(patterns);
}

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

/// Empirical q-quantile of a sample (nearest-rank).
inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const std::size_t idx = std::min(
        xs.size() - 1, static_cast<std::size_t>(q * static_cast<double>(xs.size())));
    return xs[idx];
}

}  // namespace testutil
