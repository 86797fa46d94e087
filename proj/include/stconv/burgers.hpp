#pragma once

// Spectral Galerkin solver for the stochastic Burgers equation on the
// mean-zero torus, driven by the stable convolution engine.
//
// The basis is the real trigonometric one: for wavenumber k = 1..N a cosine
// channel (mode index +k) and a sine channel (-k), both eigenvectors of
// A = -d^2/dxi^2 with gamma = k^2. The nonlinearity -u u' is evaluated
// pseudospectrally on 3N+1 physical points, which de-aliases the quadratic
// product completely, and time stepping is exponential Euler: the stiff
// diagonal part integrates exactly, only the nonlinearity is frozen per step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "stconv/convolution.hpp"
#include "stconv/grid.hpp"
#include "stconv/spectral.hpp"
#include "stconv/stable.hpp"

namespace stconv {

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t step, double time)
        : std::runtime_error("burgers solution blew up at step " + std::to_string(step) +
                             " (t = " + std::to_string(time) + ")"),
          step_(step),
          time_(time) {}
    std::size_t step() const { return step_; }
    double time() const { return time_; }

private:
    std::size_t step_;
    double time_;
};

/// Galerkin state: coefficients on a burgers_modes ModeSet plus viscosity.
/// Mean-zero holds by construction, there is no k = 0 channel.
struct BurgersState {
    ModeSet modes;
    Coeffs coeffs;
    double nu = 1.0;

    BurgersState(ModeSet m, Coeffs c, double viscosity)
        : modes(std::move(m)), coeffs(std::move(c)), nu(viscosity) {
        if (coeffs.size() != modes.size())
            throw std::invalid_argument("BurgersState: coeffs must align with modes");
        if (!(nu > 0.0)) throw std::invalid_argument("BurgersState: viscosity must be positive");
    }
};

namespace detail {

/// Highest wavenumber N of a paired cosine/sine mode set; validates layout.
inline std::size_t burgers_wavenumbers(const ModeSet& modes) {
    if (modes.empty() || modes.size() % 2 != 0)
        throw std::invalid_argument("burgers layout: expected cosine/sine channel pairs");
    const std::size_t n = modes.size() / 2;
    for (std::size_t k = 1; k <= n; ++k) {
        const Mode& c = modes[2 * (k - 1)];
        const Mode& s = modes[2 * (k - 1) + 1];
        if (c.index != static_cast<int>(k) || s.index != -static_cast<int>(k) ||
            c.gamma != static_cast<double>(k * k) || s.gamma != c.gamma)
            throw std::invalid_argument("burgers layout: modes are not the paired torus basis");
    }
    return n;
}

/// Cached cos/sin tables on the de-aliased physical grid for wavenumbers 1..N.
struct TrigTable {
    std::size_t n_wave = 0;
    std::size_t n_phys = 0;                // 3N + 1 points, exact quadratic quadrature
    std::vector<double> cosv, sinv;        // (k-1)*n_phys + m

    double c(std::size_t k, std::size_t m) const { return cosv[(k - 1) * n_phys + m]; }
    double s(std::size_t k, std::size_t m) const { return sinv[(k - 1) * n_phys + m]; }
};

inline std::shared_ptr<const TrigTable> trig_table(std::size_t n_wave) {
    static std::map<std::size_t, std::shared_ptr<const TrigTable>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n_wave);
    if (it != cache.end()) return it->second;

    auto table = std::make_shared<TrigTable>();
    table->n_wave = n_wave;
    table->n_phys = 3 * n_wave + 1;
    table->cosv.resize(n_wave * table->n_phys);
    table->sinv.resize(n_wave * table->n_phys);
    for (std::size_t k = 1; k <= n_wave; ++k) {
        for (std::size_t m = 0; m < table->n_phys; ++m) {
            const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) /
                              static_cast<double>(table->n_phys);
            table->cosv[(k - 1) * table->n_phys + m] = std::cos(static_cast<double>(k) * xi);
            table->sinv[(k - 1) * table->n_phys + m] = std::sin(static_cast<double>(k) * xi);
        }
    }
    cache.emplace(n_wave, table);
    return table;
}

}  // namespace detail

/// Field values u(xi_m) on n_points equispaced torus points. The basis
/// functions are cos(k xi)/sqrt(pi) and sin(k xi)/sqrt(pi).
inline std::vector<double> to_physical(const ModeSet& modes, const Coeffs& coeffs,
                                       std::size_t n_points) {
    const std::size_t n_wave = detail::burgers_wavenumbers(modes);
    if (coeffs.size() != modes.size())
        throw std::invalid_argument("to_physical: coeffs must align with modes");
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    std::vector<double> u(n_points, 0.0);
    for (std::size_t m = 0; m < n_points; ++m) {
        const double xi =
            2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n_points);
        double sum = 0.0;
        for (std::size_t k = 1; k <= n_wave; ++k) {
            const double kd = static_cast<double>(k);
            sum += coeffs[2 * (k - 1)] * std::cos(kd * xi) + coeffs[2 * (k - 1) + 1] * std::sin(kd * xi);
        }
        u[m] = sum * inv_sqrt_pi;
    }
    return u;
}

/// Galerkin projection of B(X) = -X dX/dxi, evaluated pseudospectrally on
/// 3N+1 points so the quadratic product is exact for every X in the span.
inline Coeffs nonlinearity(const BurgersState& state) {
    const std::size_t n_wave = detail::burgers_wavenumbers(state.modes);
    const auto table = detail::trig_table(n_wave);
    const std::size_t n_phys = table->n_phys;
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

    std::vector<double> u(n_phys, 0.0), du(n_phys, 0.0);
    for (std::size_t k = 1; k <= n_wave; ++k) {
        const double a = state.coeffs[2 * (k - 1)] * inv_sqrt_pi;
        const double b = state.coeffs[2 * (k - 1) + 1] * inv_sqrt_pi;
        const double kd = static_cast<double>(k);
        for (std::size_t m = 0; m < n_phys; ++m) {
            const double c = table->c(k, m);
            const double s = table->s(k, m);
            u[m] += a * c + b * s;
            du[m] += kd * (b * c - a * s);
        }
    }

    std::vector<double> g(n_phys);
    for (std::size_t m = 0; m < n_phys; ++m) g[m] = -u[m] * du[m];

    // analysis against the orthonormal basis: <g, cos(k xi)/sqrt(pi)> by the
    // exact equispaced quadrature (2 pi / M) sum_m
    Coeffs out(state.modes.size(), 0.0);
    const double quad = 2.0 * std::numbers::pi / static_cast<double>(n_phys) * inv_sqrt_pi;
    for (std::size_t k = 1; k <= n_wave; ++k) {
        double ac = 0.0, as = 0.0;
        for (std::size_t m = 0; m < n_phys; ++m) {
            ac += g[m] * table->c(k, m);
            as += g[m] * table->s(k, m);
        }
        out[2 * (k - 1)] = quad * ac;
        out[2 * (k - 1) + 1] = quad * as;
    }
    return out;
}

/// One exponential-Euler step
///   X' = e^{-nu A dt} (X + dt B(X)) + z_increment,
/// where z_increment is the convolution increment over the step on the same
/// mode set. Throws BlowUpError if any coefficient leaves the finite range.
inline BurgersState step_mild(const BurgersState& state, double dt, const Coeffs& z_increment,
                              bool include_nonlinearity = true, std::size_t step_index = 0) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_mild: dt must be positive");
    if (z_increment.size() != state.coeffs.size())
        throw std::invalid_argument("step_mild: z_increment must align with state");

    Coeffs next(state.coeffs.size());
    const Coeffs b = include_nonlinearity ? nonlinearity(state) : Coeffs(state.coeffs.size(), 0.0);
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double decay = std::exp(-state.nu * state.modes[i].gamma * dt);
        next[i] = decay * (state.coeffs[i] + dt * b[i]) + z_increment[i];
    }
    for (double v : next)
        if (!std::isfinite(v))
            throw BlowUpError(step_index, dt * static_cast<double>(step_index + 1));
    return BurgersState(state.modes, std::move(next), state.nu);
}

struct BurgersDiagnostics {
    std::vector<double> jump_sizes;          // ||X(t_{j+1}) - X(t_j)||_H per step
    std::vector<double> driving_jump_sizes;  // ||beta dl(t_j)||_H per step
    std::vector<double> energy;              // ||X(t_j)||_H^2 per grid point
    double max_jump = 0.0;
    double jump_threshold = 0.0;             // threshold_factor * median jump size
    std::size_t jumps_above_threshold = 0;
    // Fraction of above-threshold solution jumps whose step is among the
    // equally many largest driving increments; 1.0 when there are none.
    double jump_alignment = 1.0;
};

struct BurgersTrajectory {
    GridSpec grid;
    ModeSet modes;
    PathMatrix states;  // rows = channels, cols = grid points
    BurgersDiagnostics diagnostics;
};

struct SolveOptions {
    bool include_nonlinearity = true;
    double jump_threshold_factor = 5.0;
    std::uint32_t replica = 0;
};

namespace detail {

inline double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace detail

/// Integrates the Burgers dynamics against a supplied driving path, which
/// must live on the nu-scaled mode set (the operator of the mild form is
/// nu*A). The noise enters through the by-parts convolution path; per step
/// the increment z(t_{j+1}) - e^{-nu A dt} z(t_j) is handed to the
/// exponential-Euler update, so with the nonlinearity disabled the
/// trajectory reproduces semigroup(x0) + Z exactly.
inline BurgersTrajectory solve_path_with(const BurgersState& x0, const DrivingPath& driving,
                                         const SolveOptions& options = {}) {
    if (driving.modes.size() != x0.modes.size())
        throw std::invalid_argument("solve_path: driving modes must align with the state");
    for (std::size_t i = 0; i < x0.modes.size(); ++i) {
        const double expected = x0.nu * x0.modes[i].gamma;
        if (std::abs(driving.modes[i].gamma - expected) > 1e-12 * expected ||
            driving.modes[i].beta != x0.modes[i].beta)
            throw std::invalid_argument("solve_path: driving modes must be the nu-scaled state modes");
    }
    const GridSpec& grid = driving.grid;
    const ByPartsResult conv = convolve_by_parts(driving);

    const std::size_t n_modes = x0.modes.size();
    const std::size_t n_pts = grid.n_points();
    const double dt = grid.dt();

    BurgersTrajectory traj{grid, x0.modes, PathMatrix(n_modes, n_pts), {}};
    std::vector<double> decay(n_modes);
    for (std::size_t i = 0; i < n_modes; ++i)
        decay[i] = std::exp(-x0.nu * x0.modes[i].gamma * dt);

    BurgersState state = x0;
    for (std::size_t i = 0; i < n_modes; ++i) traj.states.at(i, 0) = state.coeffs[i];
    traj.diagnostics.energy.push_back(hnorm(x0.modes, 0.0, state.coeffs) *
                                      hnorm(x0.modes, 0.0, state.coeffs));

    Coeffs increment(n_modes);
    for (std::size_t j = 0; j + 1 < n_pts; ++j) {
        for (std::size_t i = 0; i < n_modes; ++i)
            increment[i] = conv.z.values.at(i, j + 1) - decay[i] * conv.z.values.at(i, j);

        BurgersState next = step_mild(state, dt, increment, options.include_nonlinearity, j);

        double jump2 = 0.0, drive2 = 0.0, energy = 0.0;
        for (std::size_t i = 0; i < n_modes; ++i) {
            const double dx = next.coeffs[i] - state.coeffs[i];
            const double dl = x0.modes[i].beta *
                              (driving.samples.at(i, j + 1) - driving.samples.at(i, j));
            jump2 += dx * dx;
            drive2 += dl * dl;
            energy += next.coeffs[i] * next.coeffs[i];
            traj.states.at(i, j + 1) = next.coeffs[i];
        }
        traj.diagnostics.jump_sizes.push_back(std::sqrt(jump2));
        traj.diagnostics.driving_jump_sizes.push_back(std::sqrt(drive2));
        traj.diagnostics.energy.push_back(energy);
        state = std::move(next);
    }

    BurgersDiagnostics& diag = traj.diagnostics;
    for (double j : diag.jump_sizes) diag.max_jump = std::max(diag.max_jump, j);
    diag.jump_threshold = options.jump_threshold_factor * detail::median_of(diag.jump_sizes);

    std::vector<std::size_t> big_steps;
    for (std::size_t j = 0; j < diag.jump_sizes.size(); ++j)
        if (diag.jump_sizes[j] > diag.jump_threshold && diag.jump_threshold > 0.0)
            big_steps.push_back(j);
    diag.jumps_above_threshold = big_steps.size();

    if (!big_steps.empty()) {
        std::vector<std::size_t> order(diag.driving_jump_sizes.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return diag.driving_jump_sizes[a] > diag.driving_jump_sizes[b];
        });
        std::vector<bool> top(order.size(), false);
        for (std::size_t i = 0; i < big_steps.size(); ++i) top[order[i]] = true;
        std::size_t matched = 0;
        for (std::size_t j : big_steps)
            if (top[j]) ++matched;
        diag.jump_alignment = static_cast<double>(matched) / static_cast<double>(big_steps.size());
    }
    return traj;
}

/// Simulates the driving noise for the nu-scaled operator and integrates.
inline BurgersTrajectory solve_path(const BurgersState& x0, const GridSpec& grid,
                                    const StableLaw& law, std::uint64_t seed,
                                    const SolveOptions& options = {}) {
    const ModeSet conv_modes = x0.modes.with_rates_scaled(x0.nu);
    return solve_path_with(x0, simulate_driving(conv_modes, law, grid, seed, options.replica),
                           options);
}

}  // namespace stconv
