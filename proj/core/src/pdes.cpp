#include "pinnlab/pdes.hpp"

#include <cmath>

namespace pinnlab {

std::string to_string(PdeFamily f) {
    return f == PdeFamily::CDR ? "cdr" : "helmholtz";
}

std::string to_string(IcKind k) {
    switch (k) {
        case IcKind::GaussPi2: return "gauss_pi_2";
        case IcKind::GaussPi4: return "gauss_pi_4";
        case IcKind::OnePlusSin: return "one_plus_sin";
    }
    throw ConfigError("to_string: bad IC kind");
}

PdeFamily family_from_string(const std::string& s) {
    if (s == "cdr" || s == "CDR") return PdeFamily::CDR;
    if (s == "helmholtz") return PdeFamily::Helmholtz;
    throw ConfigError("unknown PDE family: " + s);
}

IcKind ic_from_string(const std::string& s) {
    if (s == "gauss_pi_2") return IcKind::GaussPi2;
    if (s == "gauss_pi_4") return IcKind::GaussPi4;
    if (s == "one_plus_sin") return IcKind::OnePlusSin;
    throw ConfigError("unknown initial condition: " + s);
}

std::vector<double> PdeInstance::mu_vector() const {
    if (family == PdeFamily::CDR) return {mu[0], mu[1], mu[2]};
    return {mu[0]};
}

void PdeInstance::validate() const {
    if (family == PdeFamily::CDR) {
        if (mu[0] < 0 || mu[1] < 0 || mu[2] < 0)
            throw ConfigError("PdeInstance: CDR coefficients must be >= 0");
        if (horizon <= 0) throw ConfigError("PdeInstance: horizon must be > 0");
    }
}

PdeInstance PdeInstance::cdr(double beta, double nu, double rho, IcKind ic) {
    PdeInstance p;
    p.family = PdeFamily::CDR;
    p.mu = {beta, nu, rho};
    p.ic = ic;
    p.validate();
    return p;
}

PdeInstance PdeInstance::helmholtz(double a) {
    PdeInstance p;
    p.family = PdeFamily::Helmholtz;
    p.mu = {a, 0.0, 0.0};
    return p;
}

double eval_ic(IcKind ic, double x) {
    const double pi = kTwoPi / 2.0;
    switch (ic) {
        case IcKind::GaussPi2: {
            const double s = pi / 2.0;
            return std::exp(-(x - pi) * (x - pi) / (2.0 * s * s));
        }
        case IcKind::GaussPi4: {
            const double s = pi / 4.0;
            return std::exp(-(x - pi) * (x - pi) / (2.0 * s * s));
        }
        case IcKind::OnePlusSin:
            return 1.0 + std::sin(x);
    }
    throw ConfigError("eval_ic: bad IC kind");
}

double residual_cdr(const Jet2& u, const std::array<double, 3>& mu) {
    if (!(u.dims == JetDims::cdr()))
        throw ConfigError("residual_cdr: jet must track (x,t) with d2 in x");
    const double u_x = u.d1[0], u_t = u.d1[1], u_xx = u.d2[0];
    const Jet2 reaction = jet_mul(u, (-1.0 * u) + 1.0);
    return u_t + mu[0] * u_x - mu[1] * u_xx - mu[2] * reaction.value;
}

double helmholtz_source(double a, double x, double y) {
    const double pi = kTwoPi / 2.0;
    const double ap = a * pi;
    const double k = PdeInstance::k();
    return (-2.0 * ap * ap + k * k) * std::sin(ap * x) * std::sin(ap * y);
}

double residual_helmholtz(const Jet2& u, double a, double x, double y) {
    if (!(u.dims == JetDims::helmholtz()))
        throw ConfigError("residual_helmholtz: jet must track (x,y) with both d2");
    const double k = PdeInstance::k();
    return u.d2[0] + u.d2[1] + k * k * u.value - helmholtz_source(a, x, y);
}

CoefficientMask CoefficientMask::from_name(const std::string& cls) {
    if (cls == "convection") return {true, false, false};
    if (cls == "diffusion") return {false, true, false};
    if (cls == "reaction") return {false, false, true};
    if (cls == "convection_diffusion" || cls == "conv_diff")
        return {true, true, false};
    if (cls == "reaction_diffusion" || cls == "reac_diff")
        return {false, true, true};
    if (cls == "convection_diffusion_reaction" || cls == "conv_diff_reac")
        return {true, true, true};
    throw ConfigError("unknown CDR class: " + cls);
}

std::string CoefficientMask::name() const {
    if (beta && nu && rho) return "convection_diffusion_reaction";
    if (beta && nu) return "convection_diffusion";
    if (nu && rho) return "reaction_diffusion";
    if (beta) return "convection";
    if (nu) return "diffusion";
    if (rho) return "reaction";
    return "none";
}

namespace {

std::vector<double> coefficient_grid(double lo, double hi, double step) {
    if (step <= 0 || hi < lo) throw ConfigError("enumerate_instances: empty range");
    std::vector<double> grid;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
    for (int i = 0; i < n; ++i) grid.push_back(lo + step * i);
    return grid;
}

}  // namespace

std::vector<PdeInstance> enumerate_instances(const CoefficientMask& mask, double lo,
                                             double hi, double step, IcKind ic) {
    if (mask.active() == 0) throw ConfigError("enumerate_instances: no active coefficient");
    const auto grid = coefficient_grid(lo, hi, step);
    std::vector<PdeInstance> out;
    const auto bs = mask.beta ? grid : std::vector<double>{0.0};
    const auto ns = mask.nu ? grid : std::vector<double>{0.0};
    const auto rs = mask.rho ? grid : std::vector<double>{0.0};
    for (double b : bs)
        for (double n : ns)
            for (double r : rs) out.push_back(PdeInstance::cdr(b, n, r, ic));
    return out;
}

std::vector<PdeInstance> enumerate_helmholtz(double a_lo, double a_hi, double a_step) {
    std::vector<PdeInstance> out;
    for (double a : coefficient_grid(a_lo, a_hi, a_step))
        out.push_back(PdeInstance::helmholtz(a));
    return out;
}

}  // namespace pinnlab
