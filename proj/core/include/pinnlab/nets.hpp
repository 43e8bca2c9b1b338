#pragma once

#include <string>
#include <vector>

#include "pinnlab/params.hpp"
#include "pinnlab/tape.hpp"

namespace pinnlab {

enum class Variant { PINN, PINN_R, PINN_P, LargePINN, P2INN };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// Architecture description. Baselines are stacks of `layers` FC layers with
// tanh between them and a linear head. P2INN composes a parameter encoder
// (depth dp, width hidden_p), a coordinate encoder (depth dc, width hidden)
// and a manifold decoder (depth dg, width hidden) over the concatenated codes.
struct NetworkSpec {
    Variant variant = Variant::PINN;
    int coord_dim = 2;
    int mu_dim = 0;
    int hidden = 50;
    int layers = 6;
    int dp = 4, dc = 3, dg = 5;
    int hidden_p = 150;

    bool operator==(const NetworkSpec&) const = default;

    static NetworkSpec pinn(int coord_dim = 2) {
        return {Variant::PINN, coord_dim, 0, 50, 6, 0, 0, 0, 0};
    }
    static NetworkSpec pinn_r(int coord_dim = 2) {
        return {Variant::PINN_R, coord_dim, 0, 50, 6, 0, 0, 0, 0};
    }
    static NetworkSpec large_pinn(int coord_dim = 2) {
        return {Variant::LargePINN, coord_dim, 0, 143, 6, 0, 0, 0, 0};
    }
    static NetworkSpec pinn_p(int coord_dim = 2, int mu_dim = 3) {
        return {Variant::PINN_P, coord_dim, mu_dim, 150, 6, 0, 0, 0, 0};
    }
    static NetworkSpec p2inn(int coord_dim = 2, int mu_dim = 3) {
        return {Variant::P2INN, coord_dim, mu_dim, 50, 0, 4, 3, 5, 150};
    }

    bool is_p2inn() const { return variant == Variant::P2INN; }
    // Width of the jet input fed to the network body.
    int input_dim() const {
        return variant == Variant::PINN_P ? coord_dim + mu_dim : coord_dim;
    }
    void validate() const;
};

// Flat parameter store with a per-layer slice table. For P2INN the table is
// ordered parameter encoder, coordinate encoder, decoder.
struct NetworkWeights {
    NetworkSpec spec;
    Eigen::VectorXd theta;
    std::vector<LayerSlice> layer;
    int p_count = 0, c_count = 0, g_count = 0;  // P2INN sub-network layer counts

    LayerSlice p_layer(int i) const { return layer[static_cast<size_t>(i)]; }
    LayerSlice c_layer(int i) const { return layer[static_cast<size_t>(p_count + i)]; }
    LayerSlice g_layer(int i) const {
        return layer[static_cast<size_t>(p_count + c_count + i)];
    }
};

// Layer slice table for a spec (no parameter values).
std::vector<LayerSlice> layer_table(const NetworkSpec& spec, int* p_count = nullptr,
                                    int* c_count = nullptr, int* g_count = nullptr);

Index count_params(const NetworkSpec& spec);

// Glorot-uniform weights, zero biases, deterministic per seed.
NetworkWeights init_weights(const NetworkSpec& spec, uint64_t seed);

struct P2innForwardOptions {
    bool trainable = true;
    // One additive pre-activation shift per decoder hidden layer (dg-1 slices
    // into the same theta store). When set, all affine layers are frozen and
    // only the shifts receive gradients.
    const std::vector<LayerSlice>* decoder_shifts = nullptr;
};

// Stacked FC forward for PINN / PINN-R / LargePINN / PINN-P. PINN-R adds
// identity skips around every hidden layer whose widths match.
int forward_baseline(Tape& tape, const NetworkWeights& w, int input_node,
                     bool trainable = true, bool skips_enabled = true);

struct P2innForward {
    int h_param = -1;
    int h_coord = -1;
    int out = -1;
};

// u(coord; mu) = g_g([g_c(coord); g_p(mu)]). The parameter code is computed
// on plain scalars and broadcast to coordinate points via point_to_mu.
P2innForward forward_p2inn(Tape& tape, const NetworkWeights& w, int coord_node,
                           int mu_node, const std::vector<int>& point_to_mu,
                           const P2innForwardOptions& opt = {});

// Convenience single-point evaluation (plain values, no derivatives).
double eval_scalar(const NetworkWeights& w, const std::vector<double>& coord,
                   const std::vector<double>& mu = {});

}  // namespace pinnlab
