#pragma once

#include <array>
#include <cmath>

#include "pinnlab/errors.hpp"

namespace pinnlab {

// Tracked derivative layout of a jet. n1 first partials, n2 pure second
// partials. The n2 second-order directions are the first n2 of the n1
// first-order directions; mixed partials are never tracked.
struct JetDims {
    int n1 = 0;
    int n2 = 0;

    int comps() const { return 1 + n1 + n2; }

    bool operator==(const JetDims&) const = default;

    static JetDims plain() { return {0, 0}; }
    // (x, t): second derivative tracked in x only.
    static JetDims cdr() { return {2, 1}; }
    // (x, y): second derivatives tracked in both.
    static JetDims helmholtz() { return {2, 2}; }
};

// A scalar value bundled with its tracked first and pure second partials.
// Exact for polynomials of degree <= 2 in the tracked directions.
struct Jet2 {
    double value = 0.0;
    std::array<double, 2> d1{0.0, 0.0};
    std::array<double, 2> d2{0.0, 0.0};
    JetDims dims;

    Jet2() = default;
    explicit Jet2(double v, JetDims d = JetDims::plain()) : value(v), dims(d) {}

    // Seed for an input coordinate: value = x, unit first partial in its
    // own direction, zero second partials.
    static Jet2 seed(double x, int direction, JetDims d) {
        if (direction < 0 || direction >= d.n1)
            throw ConfigError("Jet2::seed: direction out of range");
        Jet2 j(x, d);
        j.d1[static_cast<size_t>(direction)] = 1.0;
        return j;
    }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r(a.value + b.value, a.dims);
    for (int i = 0; i < a.dims.n1; ++i) r.d1[i] = a.d1[i] + b.d1[i];
    for (int i = 0; i < a.dims.n2; ++i) r.d2[i] = a.d2[i] + b.d2[i];
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r(a.value - b.value, a.dims);
    for (int i = 0; i < a.dims.n1; ++i) r.d1[i] = a.d1[i] - b.d1[i];
    for (int i = 0; i < a.dims.n2; ++i) r.d2[i] = a.d2[i] - b.d2[i];
    return r;
}

inline Jet2 operator*(double c, const Jet2& a) {
    Jet2 r(c * a.value, a.dims);
    for (int i = 0; i < a.dims.n1; ++i) r.d1[i] = c * a.d1[i];
    for (int i = 0; i < a.dims.n2; ++i) r.d2[i] = c * a.d2[i];
    return r;
}

inline Jet2 operator+(const Jet2& a, double c) {
    Jet2 r = a;
    r.value += c;
    return r;
}

// Leibniz rule to order 2. Pure second partial i reuses the first partials
// in the same direction (direction i is among the first n2).
inline Jet2 jet_mul(const Jet2& a, const Jet2& b) {
    if (!(a.dims == b.dims)) throw ConfigError("jet_mul: mismatched jet dims");
    Jet2 r(a.value * b.value, a.dims);
    for (int i = 0; i < a.dims.n1; ++i)
        r.d1[i] = a.value * b.d1[i] + b.value * a.d1[i];
    for (int i = 0; i < a.dims.n2; ++i)
        r.d2[i] = a.value * b.d2[i] + 2.0 * a.d1[i] * b.d1[i] + b.value * a.d2[i];
    return r;
}

// Faa di Bruno to order 2 for y = tanh(x).
inline Jet2 jet_tanh(const Jet2& a) {
    const double s = std::tanh(a.value);
    const double sp = 1.0 - s * s;
    const double spp = -2.0 * s * sp;
    Jet2 r(s, a.dims);
    for (int i = 0; i < a.dims.n1; ++i) r.d1[i] = sp * a.d1[i];
    for (int i = 0; i < a.dims.n2; ++i)
        r.d2[i] = spp * a.d1[i] * a.d1[i] + sp * a.d2[i];
    return r;
}

// Analytic jet of sin(w*x + phi) seeded in the given direction.
inline Jet2 jet_sin(double x, double w, double phi, int direction, JetDims d) {
    Jet2 r(std::sin(w * x + phi), d);
    if (direction < d.n1) r.d1[direction] = w * std::cos(w * x + phi);
    if (direction < d.n2) r.d2[direction] = -w * w * std::sin(w * x + phi);
    return r;
}

}  // namespace pinnlab
