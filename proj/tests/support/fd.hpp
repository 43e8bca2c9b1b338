#pragma once

// Central finite-difference oracles used to cross-check analytic
// derivatives. Step sizes trade truncation against round-off for
// double precision; tolerances at call sites assume these defaults.

#include <functional>

namespace fd {

using Fn = std::function<double(double)>;

inline double d1(const Fn& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double d2(const Fn& f, double x, double h = 1e-4) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Gradient of a multivariate scalar function in one coordinate.
template <typename VecFn>
double partial(const VecFn& f, std::vector<double> x, size_t i, double h = 1e-5) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

// Pure second partial of a multivariate scalar function.
template <typename VecFn>
double partial2(const VecFn& f, std::vector<double> x, size_t i, double h = 1e-4) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (f(xp) - 2.0 * f(x) + f(xm)) / (h * h);
}

}  // namespace fd
