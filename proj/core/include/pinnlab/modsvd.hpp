#pragma once

#include <filesystem>

#include "pinnlab/nets.hpp"

namespace pinnlab {

// Full SVD A = U diag(S) V^T by one-sided Jacobi rotations. Singular values
// are nonnegative and non-increasing; the first nonzero entry of each right
// singular vector is positive, which fixes all signs deterministically.
void jacobi_svd(const Eigen::MatrixXd& A, Eigen::MatrixXd& U, Eigen::VectorXd& S,
                Eigen::MatrixXd& V);

// P2INN weights with the interior decoder layers factorized as
// Psi diag(alpha) Phi^T. Everything except the alpha diagonals is frozen.
struct SvdFactors {
    NetworkSpec spec;
    Eigen::VectorXd store;
    std::vector<LayerSlice> p_layers;
    std::vector<LayerSlice> c_layers;
    LayerSlice g_first;
    LayerSlice g_last;
    std::vector<SvdLayerSlices> g_interior;

    Index trainable_count() const;
    // Offsets/lengths of the learnable alpha segments inside `store`.
    std::vector<std::pair<Index, Index>> alpha_segments() const;
};

SvdFactors factorize_decoder(const NetworkWeights& weights);

// Same computation as forward_p2inn with interior decoder layers applied as
// Psi diag(alpha) Phi^T; gradients flow only into the alpha slots.
P2innForward forward_modulated(Tape& tape, const SvdFactors& factors,
                               int coord_node, int mu_node,
                               const std::vector<int>& point_to_mu);

void save_factors(const SvdFactors& f, const std::filesystem::path& path);
SvdFactors load_factors(const std::filesystem::path& path);

}  // namespace pinnlab
