#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pinnlab/pdes.hpp"

namespace pinnlab {

// In-place radix-2 FFT (inverse: conjugate transform scaled by 1/n).
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

// Exact logistic flow of du/dt = rho u (1 - u) over dt, with the [0,1]
// state guard from the splitting solver contract.
double reaction_step(double u, double rho, double dt);

// Exact spectral flow of u_t + beta u_x = nu u_xx over dt on a periodic
// power-of-two grid covering [0, 2pi).
std::vector<double> convdiff_step(const std::vector<double>& u, double beta,
                                  double nu, double dt);

// Space-time solution values on the uniform grid x_j = 2pi j / nx,
// t_k = horizon k / nt. Column k holds time level k.
struct SolutionGrid {
    int nx = 256;
    int nt = 100;
    PdeInstance instance;
    Eigen::MatrixXd values;  // nx x (nt+1)

    double x(int j) const { return kTwoPi * j / nx; }
    double t(int k) const { return instance.horizon * k / nt; }

    // Bilinear interpolation, periodic in x, t clamped to [0, horizon].
    double interpolate(double x, double t) const;
};

// Strang splitting R(dt/2) - CD(dt) - R(dt/2) per time step.
SolutionGrid solve_cdr(const PdeInstance& instance, int nx = 256, int nt = 100);

// u(x,y) = k^2 sin(a pi x) sin(a pi y) with k = 1.
double helmholtz_exact(double a, double x, double y);

// Jet of the exact Helmholtz solution, tracking (x, y) with both second
// partials (used by residual oracles).
Jet2 helmholtz_exact_jet(double a, double x, double y);

}  // namespace pinnlab
