#pragma once

#include <cstddef>
#include <stdexcept>

namespace stconv {

/// Uniform time grid on [0, T]: points t_j = j*dt, j = 0..n_steps.
/// n_steps = 0 is the degenerate grid holding only t = 0.
struct GridSpec {
    double horizon = 1.0;
    std::size_t n_steps = 1;

    GridSpec(double T, std::size_t n) : horizon(T), n_steps(n) {
        if (!(T > 0.0)) throw std::invalid_argument("GridSpec: horizon must be positive");
    }

    double dt() const { return n_steps ? horizon / static_cast<double>(n_steps) : 0.0; }
    double time(std::size_t j) const { return static_cast<double>(j) * dt(); }
    std::size_t n_points() const { return n_steps + 1; }
};

}  // namespace stconv
