#include "pinnlab/truth.hpp"

#include <cmath>

namespace pinnlab {

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw ConfigError("fft_radix2: size must be a power of two");
    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 1.0 : -1.0) * kTwoPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

namespace {

// Closed-form logistic flow without the state guard. Valid for u >= 0
// (values above 1 decay toward the fixed point).
double logistic_flow(double u, double rho, double dt) {
    const double e = std::exp(rho * dt);
    return u * e / (u * e + 1.0 - u);
}

}  // namespace

double reaction_step(double u, double rho, double dt) {
    if (u < -1e-9 || u > 1.0 + 1e-9)
        throw NumericError("reaction_step: state " + std::to_string(u) +
                           " outside [0,1]");
    u = std::min(std::max(u, 0.0), 1.0);
    return logistic_flow(u, rho, dt);
}

std::vector<double> convdiff_step(const std::vector<double>& u, double beta,
                                  double nu, double dt) {
    const size_t n = u.size();
    std::vector<std::complex<double>> a(n);
    for (size_t j = 0; j < n; ++j) a[j] = u[j];
    fft_radix2(a, false);
    for (size_t m = 0; m < n; ++m) {
        const double kappa =
            m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
        const std::complex<double> rate(-nu * kappa * kappa * dt, -beta * kappa * dt);
        a[m] *= std::exp(rate);
    }
    fft_radix2(a, true);
    std::vector<double> out(n);
    for (size_t j = 0; j < n; ++j) out[j] = a[j].real();
    return out;
}

double SolutionGrid::interpolate(double xq, double tq) const {
    const double dx = kTwoPi / nx;
    const double dt = instance.horizon / nt;
    double xs = std::fmod(xq, kTwoPi);
    if (xs < 0) xs += kTwoPi;
    const double ts = std::min(std::max(tq, 0.0), instance.horizon);
    const int j = std::min(static_cast<int>(xs / dx), nx - 1);
    const int k = std::min(static_cast<int>(ts / dt), nt - 1);
    const double fx = xs / dx - j;
    const double ft = ts / dt - k;
    const int jn = (j + 1) % nx;
    const double v00 = values(j, k), v10 = values(jn, k);
    const double v01 = values(j, k + 1), v11 = values(jn, k + 1);
    return (1 - fx) * (1 - ft) * v00 + fx * (1 - ft) * v10 + (1 - fx) * ft * v01 +
           fx * ft * v11;
}

SolutionGrid solve_cdr(const PdeInstance& instance, int nx, int nt) {
    if (instance.family != PdeFamily::CDR)
        throw ConfigError("solve_cdr: instance is not CDR");
    if (nx <= 0 || (nx & (nx - 1)) != 0)
        throw ConfigError("solve_cdr: nx must be a power of two");
    if (nt <= 0) throw ConfigError("solve_cdr: nt must be positive");

    SolutionGrid g;
    g.nx = nx;
    g.nt = nt;
    g.instance = instance;
    g.values.resize(nx, nt + 1);

    const double rho = instance.rho();
    const bool react = rho > 0.0;
    std::vector<double> u(static_cast<size_t>(nx));
    for (int j = 0; j < nx; ++j) {
        double v = eval_ic(instance.ic, g.x(j));
        // keep the Gaussian peaks just below the logistic fixed point
        if (react && instance.ic != IcKind::OnePlusSin && v > 1.0 - 1e-12)
            v = 1.0 - 1e-12;
        u[static_cast<size_t>(j)] = v;
        g.values(j, 0) = v;
    }

    const double dt = instance.horizon / nt;
    for (int k = 1; k <= nt; ++k) {
        if (react)
            for (auto& v : u) {
                if (v < -1e-9)
                    throw NumericError("solve_cdr: state left [0,1] at t=" +
                                       std::to_string(g.t(k)));
                v = logistic_flow(std::max(v, 0.0), rho, dt / 2.0);
            }
        u = convdiff_step(u, instance.beta(), instance.nu(), dt);
        if (react)
            for (auto& v : u) {
                if (v < -1e-9)
                    throw NumericError("solve_cdr: state left [0,1] at t=" +
                                       std::to_string(g.t(k)));
                v = logistic_flow(std::max(v, 0.0), rho, dt / 2.0);
            }
        for (int j = 0; j < nx; ++j) g.values(j, k) = u[static_cast<size_t>(j)];
    }
    return g;
}

double helmholtz_exact(double a, double x, double y) {
    const double pi = kTwoPi / 2.0;
    const double k = PdeInstance::k();
    return k * k * std::sin(a * pi * x) * std::sin(a * pi * y);
}

Jet2 helmholtz_exact_jet(double a, double x, double y) {
    const double pi = kTwoPi / 2.0;
    const double ap = a * pi;
    const double sx = std::sin(ap * x), cx = std::cos(ap * x);
    const double sy = std::sin(ap * y), cy = std::cos(ap * y);
    Jet2 u(sx * sy, JetDims::helmholtz());
    u.d1[0] = ap * cx * sy;
    u.d1[1] = ap * sx * cy;
    u.d2[0] = -ap * ap * sx * sy;
    u.d2[1] = -ap * ap * sx * sy;
    return u;
}

}  // namespace pinnlab
