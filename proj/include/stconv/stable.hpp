#pragma once

// One-dimensional standard symmetric alpha-stable sampling and the
// fractional-moment constant C(alpha, p).
//
// Convention used throughout: a standard law has characteristic function
//   E exp(i*lambda*l(t)) = exp(-t*|lambda|^alpha),
// so the increment over dt is dt^(1/alpha) times a standard draw, and a
// draw of scale sigma satisfies E|X|^p = C(alpha,p) * sigma^p for p < alpha.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stconv/grid.hpp"
#include "stconv/rng.hpp"

namespace stconv {

struct StableLaw {
    double alpha;  // stability index in (0, 2]; alpha = 2 is the Gaussian edge case

    explicit StableLaw(double a) : alpha(a) {
        if (!(a > 0.0 && a <= 2.0)) throw std::invalid_argument("StableLaw: alpha must be in (0, 2]");
    }
};

/// One standard draw via the Chambers-Mallows-Stuck transform, symmetric
/// specialization: U uniform on (-pi/2, pi/2), W standard exponential,
///   X = sin(alpha*U) / cos(U)^(1/alpha) * (cos((1-alpha)*U) / W)^((1-alpha)/alpha).
/// At alpha = 1 this collapses to tan(U) (Cauchy); at alpha = 2 it is
/// 2*sin(U)*sqrt(W), i.e. Normal(0, 2), matching exp(-lambda^2).
inline double sample_standard(const StableLaw& law, RngStream& stream) {
    const double a = law.alpha;
    const double u = std::numbers::pi * (stream.uniform_open() - 0.5);
    const double w = stream.exponential();
    const double x = std::sin(a * u) / std::pow(std::cos(u), 1.0 / a);
    return x * std::pow(std::cos((1.0 - a) * u) / w, (1.0 - a) / a);
}

/// Sample of l(dt): a standard draw at scale dt^(1/alpha).
inline double sample_increment(const StableLaw& law, double dt, RngStream& stream) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
    return std::pow(dt, 1.0 / law.alpha) * sample_standard(law, stream);
}

/// Path l(t_j), j = 0..n, with l(0) = 0, as cumulative sums of independent
/// increments. A degenerate grid (n = 0) yields the single point [0].
inline std::vector<double> sample_path(const StableLaw& law, const GridSpec& grid,
                                       RngStream& stream) {
    std::vector<double> path(grid.n_points());
    path[0] = 0.0;
    const double dt = grid.dt();
    for (std::size_t j = 1; j < path.size(); ++j)
        path[j] = path[j - 1] + sample_increment(law, dt, stream);
    return path;
}

namespace detail {

/// Nodes and weights of n-point Gauss-Legendre on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(nodes), std::move(weights))).first->second;
}

template <typename F>
double gl_integrate(F&& f, double a, double b, int n) {
    const auto& [nodes, weights] = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
}

/// integral_0^inf u^(-s) e^(-u) du for s in (0, 1), by quadrature.
/// Split at u = 1; both pieces are substituted onto [0, 1] and integrated on
/// geometrically graded panels so the endpoint behavior is resolved:
///   (0,1]:  u = v^(1/(1-s))  gives  1/(1-s) * int_0^1 exp(-v^(1/(1-s))) dv
///   [1,oo): u = 1 - ln w     gives  (1/e)   * int_0^1 (1 - ln w)^(-s) dw
inline double tail_weighted_exp_integral(double s) {
    const double q = 1.0 / (1.0 - s);
    const auto near_zero = [&](double v) { return std::exp(-std::pow(v, q)); };
    const auto tail = [&](double w) { return std::pow(1.0 - std::log(w), -s); };

    double lower = 0.0, upper = 0.0;
    double right = 1.0;
    for (int k = 0; k < 60; ++k) {
        const double left = right * 0.5;
        lower += gl_integrate(near_zero, left, right, 24);
        upper += gl_integrate(tail, left, right, 24);
        right = left;
    }
    return q * lower + upper / std::numbers::e;
}

}  // namespace detail

/// C(alpha, p) with E|X|^p = C(alpha,p) sigma^p when E e^{i lambda X} =
/// e^{-sigma^alpha |lambda|^alpha} and 0 < p < alpha.
///
/// Computed from the fractional-moment representation
///   E|X|^p = [ int_0^inf (1 - e^{-lambda^alpha}) lambda^{-1-p} dlambda ]
///          / [ int_0^inf (1 - cos u) u^{-1-p} du ],
/// where the numerator reduces by parts to (1/p) int_0^inf u^{-p/alpha} e^{-u} du
/// (evaluated by quadrature) and the denominator is the classical constant
/// (pi/2) / (Gamma(1+p) sin(p pi/2)).
///
/// The Gaussian corner (alpha = 2, p = 2) is the one admissible boundary
/// case and returns the exact variance 2; everywhere else p >= alpha is a
/// domain error because the moment is infinite.
inline double moment_constant(double alpha, double p) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw std::invalid_argument("moment_constant: alpha must be in (0, 2]");
    if (!(p > 0.0)) throw std::invalid_argument("moment_constant: p must be positive");
    if (alpha == 2.0 && p == 2.0) return 2.0;
    if (p >= alpha)
        throw std::invalid_argument("moment_constant: p >= alpha, moment is infinite");

    static std::map<std::pair<double, double>, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    const auto key = std::make_pair(alpha, p);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const double numerator = detail::tail_weighted_exp_integral(p / alpha) / p;
    const double denominator =
        (std::numbers::pi / 2.0) / (std::tgamma(1.0 + p) * std::sin(p * std::numbers::pi / 2.0));
    const double value = numerator / denominator;
    cache.emplace(key, value);
    return value;
}

}  // namespace stconv
