#pragma once

#include <cmath>
#include <type_traits>

namespace qmetro {

/// Default step for five_point_derivative, scaled by the magnitude of x.
inline double fd_step(double x) { return 1e-4 * std::max(1.0, std::abs(x)); }

/// Five-point central difference. Works for any F whose return type supports
/// scalar multiplication and addition (doubles, Eigen matrices, ...). Each
/// term is materialized so expression templates cannot dangle.
template <typename F>
auto five_point_derivative(F&& f, double x, double h) {
    using R = std::decay_t<decltype(f(x))>;
    const R a = f(x - 2 * h);
    const R b = f(x - h);
    const R c = f(x + h);
    const R d = f(x + 2 * h);
    const R out = (a - 8.0 * b + 8.0 * c - d) * (1.0 / (12.0 * h));
    return out;
}

template <typename F>
auto five_point_derivative(F&& f, double x) {
    return five_point_derivative(f, x, fd_step(x));
}

} // namespace qmetro
