#pragma once

// Eigenbasis representation of the operator A: fractional powers, the
// semigroup e^{-At}, weighted norms, and the summability diagnostics for the
// noise coefficients. Everything acts diagonally on coefficient vectors
// aligned with a ModeSet.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace stconv {

struct Mode {
    int index = 0;       // unique label; sign distinguishes paired channels
    double gamma = 1.0;  // eigenvalue of A, positive
    double beta = 0.0;   // noise coefficient on this mode
};

/// Finite truncation of the spectrum, sorted by nondecreasing gamma.
class ModeSet {
public:
    ModeSet() = default;

    explicit ModeSet(std::vector<Mode> entries) : entries_(std::move(entries)) {
        std::unordered_set<int> seen;
        double prev = 0.0;
        for (const Mode& m : entries_) {
            if (!(m.gamma > 0.0) || !std::isfinite(m.gamma))
                throw std::invalid_argument("ModeSet: gamma must be positive and finite");
            if (m.gamma < prev)
                throw std::invalid_argument("ModeSet: gamma sequence must be nondecreasing");
            if (!seen.insert(m.index).second)
                throw std::invalid_argument("ModeSet: duplicate mode index " + std::to_string(m.index));
            prev = m.gamma;
        }
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Mode& operator[](std::size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    /// Same modes with every rate multiplied by factor > 0 (the operator
    /// nu*A); noise coefficients are unchanged.
    ModeSet with_rates_scaled(double factor) const {
        if (!(factor > 0.0)) throw std::invalid_argument("with_rates_scaled: factor must be positive");
        std::vector<Mode> scaled = entries_;
        for (Mode& m : scaled) m.gamma *= factor;
        return ModeSet(std::move(scaled));
    }

private:
    std::vector<Mode> entries_;
};

/// Coefficients x_k of x = sum_k x_k e_k, aligned with a ModeSet.
using Coeffs = std::vector<double>;

namespace detail {
inline void require_aligned(const ModeSet& modes, const Coeffs& x, const char* op) {
    if (x.size() != modes.size())
        throw std::invalid_argument(std::string(op) + ": coefficient length " +
                                    std::to_string(x.size()) + " does not match mode count " +
                                    std::to_string(modes.size()));
}
}  // namespace detail

/// A^sigma x = (gamma_k^sigma x_k)_k.
inline Coeffs frac_power_apply(const ModeSet& modes, double sigma, const Coeffs& x) {
    detail::require_aligned(modes, x, "frac_power_apply");
    Coeffs out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::pow(modes[k].gamma, sigma) * x[k];
    return out;
}

/// e^{-At} x = (e^{-gamma_k t} x_k)_k, t >= 0.
inline Coeffs apply_semigroup(const ModeSet& modes, double t, const Coeffs& x) {
    detail::require_aligned(modes, x, "apply_semigroup");
    if (t < 0.0) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
    Coeffs out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(-modes[k].gamma * t) * x[k];
    return out;
}

/// || A^sigma x ||_H = ( sum_k gamma_k^{2 sigma} x_k^2 )^{1/2}.
inline double hnorm(const ModeSet& modes, double sigma, const Coeffs& x) {
    detail::require_aligned(modes, x, "hnorm");
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double w = (sigma == 0.0) ? 1.0 : std::pow(modes[k].gamma, 2.0 * sigma);
        sum += w * x[k] * x[k];
    }
    return std::sqrt(sum);
}

/// Diagnostic for sum_k |beta_k|^alpha gamma_k^{alpha theta} over the
/// truncation. Never throws: divergent regimes are deliberately probeable.
struct SummabilityReport {
    double partial_sum = 0.0;
    double tail_quartile_fraction = 0.0;  // share contributed by the last quarter of modes
    bool divergence_suspected = false;    // per-term sequence grows at the tail
};

inline SummabilityReport check_assumption(const ModeSet& modes, double alpha, double theta) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw std::invalid_argument("check_assumption: alpha must be in (0, 2]");
    SummabilityReport report;
    if (modes.empty()) return report;

    std::vector<double> terms(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        terms[k] = std::pow(std::abs(modes[k].beta), alpha) * std::pow(modes[k].gamma, alpha * theta);

    double total = 0.0;
    for (double t : terms) total += t;
    report.partial_sum = total;

    const std::size_t tail_start = (terms.size() * 3) / 4;
    double tail = 0.0;
    for (std::size_t k = tail_start; k < terms.size(); ++k) tail += terms[k];
    report.tail_quartile_fraction = (total > 0.0) ? tail / total : 0.0;

    for (std::size_t k = tail_start; k + 1 < terms.size(); ++k) {
        if (terms[k + 1] > terms[k] * (1.0 + 1e-12)) {
            report.divergence_suspected = true;
            break;
        }
    }
    return report;
}

/// Mean-zero torus modes for the Burgers setting: for k = 1..N a cosine and
/// a sine channel, each with gamma = k^2 and beta = scale * k^{-2 beta_exp}.
/// The cosine channel carries index +k, the sine channel -k.
inline ModeSet burgers_modes(std::size_t n_wavenumbers, double beta_exp, double scale) {
    if (n_wavenumbers < 1) throw std::invalid_argument("burgers_modes: N must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("burgers_modes: scale must be positive");
    std::vector<Mode> entries;
    entries.reserve(2 * n_wavenumbers);
    for (std::size_t k = 1; k <= n_wavenumbers; ++k) {
        const double kd = static_cast<double>(k);
        const double gamma = kd * kd;
        const double beta = scale * std::pow(kd, -2.0 * beta_exp);
        entries.push_back({static_cast<int>(k), gamma, beta});
        entries.push_back({-static_cast<int>(k), gamma, beta});
    }
    return ModeSet(std::move(entries));
}

}  // namespace stconv
