#pragma once

// Driving noise paths and the stochastic convolution Z computed two ways:
// a direct per-mode Ornstein-Uhlenbeck recursion, and the split Z = L - Y
// with Y obtained by exponential quadrature of the pathwise integral
// Y(t) = int_0^t A e^{-A(t-s)} L_s ds. The Wiener analogue carries the same
// structure with Brownian driving.
//
// Discretization choices (uniform grid, step D = T/n, a = e^{-gamma D}):
//   direct:   z[j+1] = a z[j] + e^{-gamma D/2} beta (l[j+1] - l[j])
//             the step increment is placed at the step midpoint
//   by parts: y[j+1] = a y[j] + (1 - a) beta l[j]
//             l is treated as piecewise constant at the left endpoint,
//             and z[j] = beta l[j] - y[j]
// Values are plain doubles; heavy-tail overflow is never clipped here and
// surfaces downstream as a degenerate-sample count.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stconv/grid.hpp"
#include "stconv/rng.hpp"
#include "stconv/spectral.hpp"
#include "stconv/stable.hpp"

namespace stconv {

enum class FieldRole { L, Y, Z, Z_W };

inline const char* to_string(FieldRole role) {
    switch (role) {
        case FieldRole::L: return "L";
        case FieldRole::Y: return "Y";
        case FieldRole::Z: return "Z";
        case FieldRole::Z_W: return "Z_W";
    }
    return "?";
}

/// Row-major (modes x grid points) matrix of path values.
class PathMatrix {
public:
    PathMatrix() = default;
    PathMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
    double at(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Raw scalar driving paths l_k(t_j), one row per mode, beta not applied.
struct DrivingPath {
    GridSpec grid;
    ModeSet modes;
    PathMatrix samples;
};

struct FieldPath {
    GridSpec grid;
    ModeSet modes;
    PathMatrix values;
    FieldRole role = FieldRole::Z;
};

/// Independent stable paths, one per mode, on streams (seed, replica, row).
inline DrivingPath simulate_driving(const ModeSet& modes, const StableLaw& law,
                                    const GridSpec& grid, std::uint64_t seed,
                                    std::uint32_t replica = 0) {
    DrivingPath driving{grid, modes, PathMatrix(modes.size(), grid.n_points())};
    const double dt = grid.dt();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        RngStream stream(seed, replica, static_cast<std::uint32_t>(k));
        double* row = driving.samples.row(k);
        row[0] = 0.0;
        for (std::size_t j = 1; j < grid.n_points(); ++j)
            row[j] = row[j - 1] + sample_increment(law, dt, stream);
    }
    return driving;
}

/// The weighted field L(t_j) with rows beta_k l_k(t_j).
inline FieldPath weighted_driving(const DrivingPath& driving) {
    FieldPath field{driving.grid, driving.modes,
                    PathMatrix(driving.modes.size(), driving.grid.n_points()), FieldRole::L};
    for (std::size_t k = 0; k < driving.modes.size(); ++k) {
        const double beta = driving.modes[k].beta;
        const double* in = driving.samples.row(k);
        double* out = field.values.row(k);
        for (std::size_t j = 0; j < driving.grid.n_points(); ++j) out[j] = beta * in[j];
    }
    return field;
}

/// Direct OU recursion with midpoint increment placement.
inline FieldPath convolve_direct(const DrivingPath& driving) {
    FieldPath z{driving.grid, driving.modes,
                PathMatrix(driving.modes.size(), driving.grid.n_points()), FieldRole::Z};
    const double dt = driving.grid.dt();
    for (std::size_t k = 0; k < driving.modes.size(); ++k) {
        const double gamma = driving.modes[k].gamma;
        const double beta = driving.modes[k].beta;
        const double decay = std::exp(-gamma * dt);
        const double half_decay = std::exp(-gamma * dt * 0.5);
        const double* l = driving.samples.row(k);
        double* out = z.values.row(k);
        out[0] = 0.0;
        for (std::size_t j = 0; j + 1 < driving.grid.n_points(); ++j)
            out[j + 1] = decay * out[j] + half_decay * beta * (l[j + 1] - l[j]);
    }
    return z;
}

struct ByPartsResult {
    FieldPath y;  // role Y, continuous part
    FieldPath z;  // role Z, z = beta l - y
};

/// Integration-by-parts route: Y by left-endpoint exponential quadrature,
/// Z as the weighted driving minus Y.
inline ByPartsResult convolve_by_parts(const DrivingPath& driving) {
    const std::size_t n_pts = driving.grid.n_points();
    ByPartsResult result{
        FieldPath{driving.grid, driving.modes, PathMatrix(driving.modes.size(), n_pts), FieldRole::Y},
        FieldPath{driving.grid, driving.modes, PathMatrix(driving.modes.size(), n_pts), FieldRole::Z}};
    const double dt = driving.grid.dt();
    for (std::size_t k = 0; k < driving.modes.size(); ++k) {
        const double gamma = driving.modes[k].gamma;
        const double beta = driving.modes[k].beta;
        const double decay = std::exp(-gamma * dt);
        const double gain = -std::expm1(-gamma * dt);  // 1 - e^{-gamma dt}, stable for small dt
        const double* l = driving.samples.row(k);
        double* y = result.y.values.row(k);
        double* z = result.z.values.row(k);
        y[0] = 0.0;
        z[0] = 0.0;
        for (std::size_t j = 0; j + 1 < n_pts; ++j) {
            y[j + 1] = decay * y[j] + gain * beta * l[j];
            z[j + 1] = beta * l[j + 1] - y[j + 1];
        }
    }
    return result;
}

struct WienerResult {
    FieldPath driving;  // role L: rows q_k w_k(t_j)
    FieldPath y;        // role Y
    FieldPath z;        // role Z_W, exact OU transitions
};

/// Wiener analogue. Per step the Brownian increment and the convolution
/// integral int e^{-gamma(t_{j+1}-s)} dw are drawn as a correlated Gaussian
/// pair, so z has the exact OU transition
///   z[j+1] = e^{-gamma D} z[j] + q xi,  xi ~ N(0, (1 - e^{-2 gamma D})/(2 gamma)),
/// while staying coupled to the same Brownian path that feeds the Y route.
/// The mode coefficients are read as q_k; sum q_k^2 < infinity is the
/// Hilbert-Schmidt requirement on the truncation.
inline WienerResult wiener_convolve(const ModeSet& modes, const GridSpec& grid,
                                    std::uint64_t seed, std::uint32_t replica = 0) {
    const std::size_t n_pts = grid.n_points();
    WienerResult result{FieldPath{grid, modes, PathMatrix(modes.size(), n_pts), FieldRole::L},
                        FieldPath{grid, modes, PathMatrix(modes.size(), n_pts), FieldRole::Y},
                        FieldPath{grid, modes, PathMatrix(modes.size(), n_pts), FieldRole::Z_W}};
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double gamma = modes[k].gamma;
        const double q = modes[k].beta;
        const double decay = std::exp(-gamma * dt);
        const double gain = -std::expm1(-gamma * dt);
        const double var = -std::expm1(-2.0 * gamma * dt) / (2.0 * gamma);
        const double cov = gain / gamma;  // Cov(dw, int e^{-gamma(t+ -s)} dw)
        const double cond_sd = std::sqrt(std::max(0.0, var - cov * cov / dt));

        RngStream stream(seed, replica, static_cast<std::uint32_t>(k));
        double* qw = result.driving.values.row(k);
        double* y = result.y.values.row(k);
        double* z = result.z.values.row(k);
        qw[0] = y[0] = z[0] = 0.0;
        double w = 0.0;
        for (std::size_t j = 0; j + 1 < n_pts; ++j) {
            const auto [g1, g2] = stream.normal_pair();
            const double dw = sqrt_dt * g1;
            const double kernel_integral = (cov / dt) * dw + cond_sd * g2;
            y[j + 1] = decay * y[j] + gain * q * w;
            w += dw;
            qw[j + 1] = q * w;
            z[j + 1] = decay * z[j] + q * kernel_integral;
        }
    }
    return result;
}

/// sup over grid points of ||A^sigma field(t_j)||_H^p, streamed without
/// per-column allocation. Returns +infinity when the path overflowed.
inline double sup_hnorm_pow(const FieldPath& field, double sigma, double p) {
    const std::size_t n_pts = field.grid.n_points();
    std::vector<double> norm2(n_pts, 0.0);
    for (std::size_t k = 0; k < field.modes.size(); ++k) {
        const double w = (sigma == 0.0) ? 1.0 : std::pow(field.modes[k].gamma, 2.0 * sigma);
        const double* row = field.values.row(k);
        for (std::size_t j = 0; j < n_pts; ++j) norm2[j] += w * row[j] * row[j];
    }
    double sup = 0.0;
    for (double v : norm2) {
        if (std::isnan(v)) return v;
        sup = std::max(sup, v);
    }
    return std::pow(sup, 0.5 * p);
}

}  // namespace stconv
