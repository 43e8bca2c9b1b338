#pragma once

#include <array>
#include <string>
#include <vector>

#include "pinnlab/jet.hpp"

namespace pinnlab {

enum class PdeFamily { CDR, Helmholtz };

enum class IcKind { GaussPi2, GaussPi4, OnePlusSin };

std::string to_string(PdeFamily f);
std::string to_string(IcKind k);
PdeFamily family_from_string(const std::string& s);
IcKind ic_from_string(const std::string& s);

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// One parameterized PDE. CDR: u_t + beta u_x - nu u_xx - rho u(1-u) = 0 on
// x in [0, 2pi], t in [0, 1], periodic in x. Helmholtz: u_xx + u_yy + k^2 u
// = q(x,y) on [-1,1]^2 with k = 1 and a1 = a2 = a, Dirichlet from the exact
// solution.
struct PdeInstance {
    PdeFamily family = PdeFamily::CDR;
    // CDR: (beta, nu, rho); Helmholtz: (a, 0, 0).
    std::array<double, 3> mu{0.0, 0.0, 0.0};
    IcKind ic = IcKind::GaussPi2;
    double horizon = 1.0;  // CDR only

    double beta() const { return mu[0]; }
    double nu() const { return mu[1]; }
    double rho() const { return mu[2]; }
    double a() const { return mu[0]; }
    static constexpr double k() { return 1.0; }

    int mu_dim() const { return family == PdeFamily::CDR ? 3 : 1; }
    std::vector<double> mu_vector() const;
    void validate() const;

    static PdeInstance cdr(double beta, double nu, double rho,
                           IcKind ic = IcKind::GaussPi2);
    static PdeInstance helmholtz(double a);
};

// u(x, 0) for the three CDR initial conditions (unnormalized Gaussian bumps
// peaking at 1, and 1 + sin x).
double eval_ic(IcKind ic, double x);

// CDR residual from a solution jet tracking (x, t) with d2 in x.
double residual_cdr(const Jet2& u, const std::array<double, 3>& mu);

// Helmholtz source q(x,y) = (-(a pi)^2 - (a pi)^2 + k^2) sin(a pi x) sin(a pi y).
double helmholtz_source(double a, double x, double y);

// Helmholtz residual from a jet tracking (x, y) with both second partials.
double residual_helmholtz(const Jet2& u, double a, double x, double y);

// Which of (beta, nu, rho) a CDR class activates.
struct CoefficientMask {
    bool beta = false, nu = false, rho = false;

    static CoefficientMask from_name(const std::string& cls);
    std::string name() const;
    int active() const { return (beta ? 1 : 0) + (nu ? 1 : 0) + (rho ? 1 : 0); }
};

// Cartesian product of the active coefficients over {lo, lo+step, ..., hi},
// inactive coefficients pinned to 0.
std::vector<PdeInstance> enumerate_instances(const CoefficientMask& mask, double lo,
                                             double hi, double step,
                                             IcKind ic = IcKind::GaussPi2);
std::vector<PdeInstance> enumerate_helmholtz(double a_lo, double a_hi, double a_step);

}  // namespace pinnlab
