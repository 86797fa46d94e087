#pragma once

// Monte Carlo harness for the quantitative claims about the convolution:
// uniform moment estimates and their scaling exponents, small-ball hit
// counting with a Wilson lower bound, and the inequality checks (Doob,
// Khintchine, scalar fractional-moment law) that back them.
//
// Replicas are independent tasks writing into index-addressed slots; all
// reductions run afterwards in replica order, so every report is a pure
// function of (inputs, seed) regardless of thread count. Heavy tails can
// overflow a replica to infinity; such samples are excluded from means but
// counted, and a rate above 1% trips the degenerate gate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stconv/convolution.hpp"
#include "stconv/parallel.hpp"
#include "stconv/rng.hpp"
#include "stconv/spectral.hpp"
#include "stconv/stable.hpp"

namespace stconv {

inline constexpr double kDegenerateGateRate = 0.01;

namespace detail {

struct ReplicateStats {
    double mean = 0.0;
    double std_error = 0.0;
    double median_of_means = 0.0;
    std::size_t valid = 0;
    std::size_t degenerate = 0;
};

inline ReplicateStats replicate_stats(const std::vector<double>& samples) {
    ReplicateStats stats;
    std::vector<double> valid;
    valid.reserve(samples.size());
    for (double v : samples) {
        if (std::isfinite(v))
            valid.push_back(v);
        else
            ++stats.degenerate;
    }
    stats.valid = valid.size();
    if (valid.empty()) {
        stats.mean = stats.std_error = stats.median_of_means =
            std::numeric_limits<double>::quiet_NaN();
        return stats;
    }

    double sum = 0.0;
    for (double v : valid) sum += v;
    stats.mean = sum / static_cast<double>(valid.size());

    double ss = 0.0;
    for (double v : valid) ss += (v - stats.mean) * (v - stats.mean);
    stats.std_error = valid.size() > 1
                          ? std::sqrt(ss / (static_cast<double>(valid.size()) *
                                            static_cast<double>(valid.size() - 1)))
                          : 0.0;

    const std::size_t groups = std::min<std::size_t>(20, valid.size());
    std::vector<double> group_means(groups, 0.0);
    std::vector<std::size_t> group_sizes(groups, 0);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const std::size_t g = i * groups / valid.size();
        group_means[g] += valid[i];
        ++group_sizes[g];
    }
    for (std::size_t g = 0; g < groups; ++g) group_means[g] /= static_cast<double>(group_sizes[g]);
    std::sort(group_means.begin(), group_means.end());
    stats.median_of_means = groups % 2 ? group_means[groups / 2]
                                       : 0.5 * (group_means[groups / 2 - 1] + group_means[groups / 2]);
    return stats;
}

inline double terminal_hnorm_pow(const FieldPath& field, double sigma, double p) {
    const std::size_t last = field.grid.n_points() - 1;
    double norm2 = 0.0;
    for (std::size_t k = 0; k < field.modes.size(); ++k) {
        const double w = (sigma == 0.0) ? 1.0 : std::pow(field.modes[k].gamma, 2.0 * sigma);
        const double v = field.values.at(k, last);
        norm2 += w * v * v;
    }
    return std::pow(norm2, 0.5 * p);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ssr += r * r;
        }
        fit.slope_std_error = std::sqrt(ssr / (static_cast<double>(n - 2) * sxx));
    }
    return fit;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Uniform moment estimate E sup_{t<=T} ||A^theta_tilde Z(t)||^p over a ladder
// of horizons, with log-log slope recovery.
// ---------------------------------------------------------------------------

struct LadderPoint {
    double horizon = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double median_of_means = 0.0;
    std::size_t replicas = 0;
    std::size_t degenerate = 0;
};

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
};

struct MomentReport {
    double p = 0.0;
    double theta_tilde = 0.0;
    std::size_t n_steps = 0;
    std::vector<LadderPoint> points;
    std::optional<SlopeFit> slope;  // present once >= 4 ladder points succeeded
    bool summability_warning = false;
    bool degenerate_gate_failed = false;
};

/// OLS of log(estimate) on log(T) across the valid ladder points.
inline SlopeFit fit_scaling_exponent(const MomentReport& report) {
    std::vector<double> lx, ly;
    for (const LadderPoint& pt : report.points) {
        if (std::isfinite(pt.estimate) && pt.estimate > 0.0) {
            lx.push_back(std::log(pt.horizon));
            ly.push_back(std::log(pt.estimate));
        }
    }
    if (lx.size() < 4)
        throw std::invalid_argument("fit_scaling_exponent: need at least 4 valid ladder points");
    const detail::OlsFit fit = detail::ols(lx, ly);
    return SlopeFit{fit.slope, fit.slope_std_error};
}

namespace detail {

template <typename SupFn>
MomentReport sup_moment_impl(double theta_tilde, double p, const std::vector<double>& horizons,
                             std::size_t n_steps, std::size_t replicas, std::uint64_t seed,
                             unsigned threads, bool summability_warning, SupFn&& sup_of_replica) {
    if (horizons.empty()) throw std::invalid_argument("sup_moment: horizon ladder is empty");
    if (replicas < 1) throw std::invalid_argument("sup_moment: need at least one replica");

    MomentReport report;
    report.p = p;
    report.theta_tilde = theta_tilde;
    report.n_steps = n_steps;
    report.summability_warning = summability_warning;

    for (std::size_t li = 0; li < horizons.size(); ++li) {
        const GridSpec grid(horizons[li], n_steps);
        const std::uint64_t ladder_seed = derive_seed(seed, li);
        std::vector<double> sups(replicas);
        parallel_for_index(replicas, threads, [&](std::size_t r) {
            sups[r] = sup_of_replica(grid, ladder_seed, static_cast<std::uint32_t>(r));
        });
        const ReplicateStats stats = replicate_stats(sups);
        report.points.push_back(LadderPoint{horizons[li], stats.mean, stats.std_error,
                                            stats.median_of_means, replicas, stats.degenerate});
        if (static_cast<double>(stats.degenerate) >
            kDegenerateGateRate * static_cast<double>(replicas))
            report.degenerate_gate_failed = true;
    }

    std::size_t valid_points = 0;
    for (const LadderPoint& pt : report.points)
        if (std::isfinite(pt.estimate) && pt.estimate > 0.0) ++valid_points;
    if (valid_points >= 4) report.slope = fit_scaling_exponent(report);
    return report;
}

}  // namespace detail

/// Stable-noise uniform moment ladder; Z built by the direct OU recursion.
inline MomentReport sup_moment(const ModeSet& modes, const StableLaw& law, double theta_tilde,
                               double p, const std::vector<double>& horizons, std::size_t n_steps,
                               std::size_t replicas, std::uint64_t seed, unsigned threads = 1) {
    if (!(p > 0.0) || p >= law.alpha)
        throw std::invalid_argument("sup_moment: requires 0 < p < alpha (only p < alpha moments exist)");
    const bool warn = check_assumption(modes, law.alpha, theta_tilde).divergence_suspected;
    return detail::sup_moment_impl(
        theta_tilde, p, horizons, n_steps, replicas, seed, threads, warn,
        [&](const GridSpec& grid, std::uint64_t s, std::uint32_t r) {
            const DrivingPath driving = simulate_driving(modes, law, grid, s, r);
            return sup_hnorm_pow(convolve_direct(driving), theta_tilde, p);
        });
}

/// Wiener analogue; any p > 0 is admissible.
inline MomentReport sup_moment_wiener(const ModeSet& modes, double theta_tilde, double p,
                                      const std::vector<double>& horizons, std::size_t n_steps,
                                      std::size_t replicas, std::uint64_t seed,
                                      unsigned threads = 1) {
    if (!(p > 0.0)) throw std::invalid_argument("sup_moment_wiener: p must be positive");
    return detail::sup_moment_impl(
        theta_tilde, p, horizons, n_steps, replicas, seed, threads, false,
        [&](const GridSpec& grid, std::uint64_t s, std::uint32_t r) {
            return sup_hnorm_pow(wiener_convolve(modes, grid, s, r).z, theta_tilde, p);
        });
}

// ---------------------------------------------------------------------------
// Small-ball probability P(sup_{t<=T} ||A^theta_tilde Z(t)|| <= eps).
// ---------------------------------------------------------------------------

struct SmallBallReport {
    double epsilon = 0.0;
    double horizon = 0.0;
    double theta_tilde = 0.0;
    std::size_t replicas = 0;
    std::size_t hits = 0;
    std::size_t degenerate = 0;
    double wilson_lower = 0.0;  // 99% one-sided lower confidence bound
};

/// Wilson score lower bound; exactly 0 when hits = 0, strictly positive otherwise.
inline double wilson_lower_bound(std::size_t hits, std::size_t trials, double z = 2.3263478740408408) {
    if (trials == 0) return 0.0;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double center = phat + z2 / (2.0 * n);
    const double margin = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    const double lower = (center - margin) / (1.0 + z2 / n);
    return std::clamp(lower, 0.0, 1.0);
}

inline SmallBallReport small_ball(const ModeSet& modes, const StableLaw& law, double theta_tilde,
                                  double epsilon, double horizon, std::size_t n_steps,
                                  std::size_t replicas, std::uint64_t seed, unsigned threads = 1) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("small_ball: epsilon must be positive");
    const GridSpec grid(horizon, n_steps);
    std::vector<double> sups(replicas);
    parallel_for_index(replicas, threads, [&](std::size_t r) {
        const DrivingPath driving =
            simulate_driving(modes, law, grid, seed, static_cast<std::uint32_t>(r));
        sups[r] = sup_hnorm_pow(convolve_direct(driving), theta_tilde, 1.0);
    });

    SmallBallReport report;
    report.epsilon = epsilon;
    report.horizon = horizon;
    report.theta_tilde = theta_tilde;
    report.replicas = replicas;
    for (double s : sups) {
        if (!std::isfinite(s))
            ++report.degenerate;  // an overflowed path is never inside the ball
        else if (s <= epsilon)
            ++report.hits;
    }
    report.wilson_lower = wilson_lower_bound(report.hits, replicas);
    return report;
}

// ---------------------------------------------------------------------------
// Doob maximal inequality on the weighted driving field L:
//   E sup_{t<=T} ||A^tt L_t||^p  <=  (p/(p-1))^p  E ||A^tt L_T||^p.
// ---------------------------------------------------------------------------

struct DoobReport {
    double p = 0.0;
    double bound = 0.0;  // (p/(p-1))^p
    double sup_moment = 0.0;
    double terminal_moment = 0.0;
    double ratio = 0.0;
    double ratio_std_error = 0.0;  // bootstrap
    std::size_t replicas = 0;
    std::size_t degenerate = 0;
    bool degenerate_ratio = false;  // both sides zero (e.g. beta identically 0)
};

inline DoobReport doob_check(const ModeSet& modes, const StableLaw& law, double theta_tilde,
                             double p, double horizon, std::size_t n_steps, std::size_t replicas,
                             std::uint64_t seed, unsigned threads = 1) {
    // The martingale moment needs p > 1; p may sit at alpha itself for the
    // empirical ratio even though the limit moment is infinite there.
    if (!(p > 1.0) || p > law.alpha)
        throw std::invalid_argument("doob_check: requires 1 < p <= alpha");

    const GridSpec grid(horizon, n_steps);
    std::vector<double> sup_pow(replicas), term_pow(replicas);
    parallel_for_index(replicas, threads, [&](std::size_t r) {
        const DrivingPath driving =
            simulate_driving(modes, law, grid, seed, static_cast<std::uint32_t>(r));
        const FieldPath weighted = weighted_driving(driving);
        sup_pow[r] = sup_hnorm_pow(weighted, theta_tilde, p);
        term_pow[r] = detail::terminal_hnorm_pow(weighted, theta_tilde, p);
    });

    DoobReport report;
    report.p = p;
    report.bound = std::pow(p / (p - 1.0), p);
    report.replicas = replicas;

    std::vector<std::size_t> valid_idx;
    valid_idx.reserve(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        if (std::isfinite(sup_pow[r]) && std::isfinite(term_pow[r]))
            valid_idx.push_back(r);
        else
            ++report.degenerate;
    }
    if (valid_idx.empty()) {
        report.degenerate_ratio = true;
        return report;
    }

    double sup_sum = 0.0, term_sum = 0.0;
    for (std::size_t r : valid_idx) {
        sup_sum += sup_pow[r];
        term_sum += term_pow[r];
    }
    const double n_valid = static_cast<double>(valid_idx.size());
    report.sup_moment = sup_sum / n_valid;
    report.terminal_moment = term_sum / n_valid;
    if (report.terminal_moment <= 0.0) {
        report.degenerate_ratio = true;
        return report;
    }
    report.ratio = report.sup_moment / report.terminal_moment;

    constexpr std::size_t kBootstrap = 200;
    RngStream boot(derive_seed(seed, 0xD00Bull), 0, 0);
    std::vector<double> ratios;
    ratios.reserve(kBootstrap);
    for (std::size_t b = 0; b < kBootstrap; ++b) {
        double bs = 0.0, bt = 0.0;
        for (std::size_t i = 0; i < valid_idx.size(); ++i) {
            const std::size_t pick =
                valid_idx[static_cast<std::size_t>(boot.uniform01() * n_valid)];
            bs += sup_pow[pick];
            bt += term_pow[pick];
        }
        if (bt > 0.0) ratios.push_back(bs / bt);
    }
    if (ratios.size() > 1) {
        double mean = 0.0;
        for (double v : ratios) mean += v;
        mean /= static_cast<double>(ratios.size());
        double ss = 0.0;
        for (double v : ratios) ss += (v - mean) * (v - mean);
        report.ratio_std_error = std::sqrt(ss / static_cast<double>(ratios.size() - 1));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Khintchine inequality (sum h_k^2)^{1/2} <= C(p) (E'|sum r_k h_k|^p)^{1/p}
// over Rademacher signs.
// ---------------------------------------------------------------------------

struct KhintchineReport {
    double l2_norm = 0.0;
    double lp_mean = 0.0;     // E'|sum r_k h_k|^p
    double lp_norm = 0.0;     // lp_mean^{1/p}
    double ratio = 0.0;       // l2_norm / lp_norm, the empirical C(p) lower envelope
    double mean_std_error = 0.0;
    std::size_t replicas = 0;
};

inline KhintchineReport khintchine_check(const std::vector<double>& h, double p,
                                         std::size_t replicas, std::uint64_t seed,
                                         unsigned threads = 1) {
    if (!(p > 0.0)) throw std::invalid_argument("khintchine_check: p must be positive");
    double l2 = 0.0;
    bool any_nonzero = false;
    for (double v : h) {
        if (!std::isfinite(v)) throw std::invalid_argument("khintchine_check: h must be finite");
        if (v != 0.0) any_nonzero = true;
        l2 += v * v;
    }
    if (!any_nonzero) throw std::invalid_argument("khintchine_check: h must be nonzero");

    std::vector<double> samples(replicas);
    parallel_for_index(replicas, threads, [&](std::size_t r) {
        RngStream stream(seed, static_cast<std::uint32_t>(r), 0);
        double s = 0.0;
        for (double v : h) s += stream.rademacher() * v;
        samples[r] = std::pow(std::abs(s), p);
    });
    const detail::ReplicateStats stats = detail::replicate_stats(samples);

    KhintchineReport report;
    report.l2_norm = std::sqrt(l2);
    report.lp_mean = stats.mean;
    report.lp_norm = std::pow(stats.mean, 1.0 / p);
    report.ratio = report.l2_norm / report.lp_norm;
    report.mean_std_error = stats.std_error;
    report.replicas = replicas;
    return report;
}

// ---------------------------------------------------------------------------
// Scalar fractional-moment law on the weighted field at one time:
// the Rademacher aggregate sum_k r_k beta_k gamma_k^theta l_k(t) is exactly
// stable with scale (t sum_k |beta_k gamma_k^theta|^alpha)^{1/alpha}, so its
// p-th absolute moment equals moment_constant(alpha,p) * scale^p.
// ---------------------------------------------------------------------------

struct MomentFormulaReport {
    double scale = 0.0;
    double exact_moment = 0.0;             // C(alpha,p) * scale^p
    double aggregate_moment = 0.0;         // E|sum_k r_k beta_k gamma^theta l_k(t)|^p
    double aggregate_std_error = 0.0;
    double norm_moment = 0.0;              // E ||A^theta L_t||^p
    double norm_std_error = 0.0;
    double aggregate_ratio = 0.0;          // aggregate_moment / exact_moment
    double norm_ratio = 0.0;               // norm_moment / exact_moment (== 1 for one mode)
    std::size_t replicas = 0;
    std::size_t degenerate = 0;
};

inline MomentFormulaReport moment_formula_check(const ModeSet& modes, const StableLaw& law,
                                                double theta, double t, double p,
                                                std::size_t replicas, std::uint64_t seed,
                                                unsigned threads = 1) {
    if (!(p > 0.0) || !(p < law.alpha / 2.0))
        throw std::invalid_argument(
            "moment_formula_check: requires 0 < p < alpha/2 for a finite-variance estimator");
    if (!(t > 0.0)) throw std::invalid_argument("moment_formula_check: t must be positive");

    double sum_scale = 0.0;
    std::vector<double> weights(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        weights[k] = modes[k].beta * std::pow(modes[k].gamma, theta);
        sum_scale += std::pow(std::abs(weights[k]), law.alpha);
    }
    const double scale = std::pow(t * sum_scale, 1.0 / law.alpha);

    std::vector<double> norm_pow(replicas), agg_pow(replicas);
    parallel_for_index(replicas, threads, [&](std::size_t r) {
        RngStream stream(seed, static_cast<std::uint32_t>(r), 0);
        double norm2 = 0.0, agg = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const double lk = sample_increment(law, t, stream);
            const int sign = stream.rademacher();
            norm2 += weights[k] * weights[k] * lk * lk;
            agg += sign * weights[k] * lk;
        }
        norm_pow[r] = std::pow(norm2, 0.5 * p);
        agg_pow[r] = std::pow(std::abs(agg), p);
    });

    const detail::ReplicateStats norm_stats = detail::replicate_stats(norm_pow);
    const detail::ReplicateStats agg_stats = detail::replicate_stats(agg_pow);

    MomentFormulaReport report;
    report.scale = scale;
    report.exact_moment = (scale > 0.0) ? moment_constant(law.alpha, p) * std::pow(scale, p) : 0.0;
    report.aggregate_moment = agg_stats.mean;
    report.aggregate_std_error = agg_stats.std_error;
    report.norm_moment = norm_stats.mean;
    report.norm_std_error = norm_stats.std_error;
    report.aggregate_ratio =
        (report.exact_moment > 0.0) ? report.aggregate_moment / report.exact_moment : 0.0;
    report.norm_ratio =
        (report.exact_moment > 0.0) ? report.norm_moment / report.exact_moment : 0.0;
    report.replicas = replicas;
    report.degenerate = norm_stats.degenerate + agg_stats.degenerate;
    if (scale == 0.0) {
        report.aggregate_ratio = report.norm_ratio = 0.0;
    }
    return report;
}

}  // namespace stconv
