#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pinnlab/errors.hpp"
#include "pinnlab/jet.hpp"
#include "pinnlab/params.hpp"

namespace pinnlab {

// Decomposed layer W = Psi * diag(alpha) * Phi^T with frozen bases and bias;
// only the alpha diagonal receives gradients.
struct SvdLayerSlices {
    LayerSlice psi;       // rows x r
    LayerSlice phi;       // cols x r
    Index alpha_off = 0;  // length r
    Index alpha_len = 0;
    Index b_off = -1;     // bias, frozen
    Index b_len = 0;
};

// Per-point CDR residual coefficients.
struct CdrCoef {
    int point;
    double beta, nu, rho;
};

// Per-point Helmholtz residual data: source q precomputed at the point.
struct HelmholtzCoef {
    int point;
    double k2;  // k^2
    double q;
};

// Record of a forward pass over batched jet vectors. Jet nodes hold a
// width x (batch*comps) matrix, one block of comps columns per point
// (value, then d1, then d2). Plain nodes hold a 1 x n row of scalars.
// Reverse sweep visits nodes in exact reverse order of recording.
class Tape {
  public:
    explicit Tape(const Eigen::VectorXd& theta) : theta_(&theta) {}

    // --- jet-vector nodes -------------------------------------------------
    int input(Eigen::MatrixXd jets, JetDims dims, int batch);
    int input(const std::vector<Jet2>& jets);  // batch of 1, width = jets.size()

    int affine(int x, const LayerSlice& layer, bool trainable = true);
    int affine_svd(int x, const SvdLayerSlices& slices, bool alpha_trainable = true);
    int shift(int x, const LayerSlice& shift_vec, bool trainable = true);
    int activate_tanh(int x);
    int add(int a, int b);
    int axpb(int x, double a, double b);  // a*x, +b on the value component
    int mul(int a, int b);                // elementwise jet product

    // Append the coordinate-encoder output (jets) on top of a broadcast
    // plain code: block p gets plain column point_to_block[p], derivatives 0.
    int concat(int jets, int plain, std::vector<int> point_to_block);

    // --- plain scalar nodes ----------------------------------------------
    int cdr_residual(int u, int reaction, std::vector<CdrCoef> coefs);
    int helmholtz_residual(int u, std::vector<HelmholtzCoef> coefs);
    int gather_value(int x, std::vector<int> points);
    int pair_diff(int x, std::vector<int> pairs);  // flattened (left, right)
    int squared_mean(int plain, std::vector<double> targets = {});
    int weighted_sum(std::vector<int> scalars, std::vector<double> coeffs);

    // --- access ------------------------------------------------------------
    double value(int node) const;
    const Eigen::MatrixXd& out(int node) const { return nodes_[node].out; }
    std::vector<Jet2> jets_of(int node) const;
    JetDims dims_of(int node) const { return nodes_[node].dims; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Recompute every non-input node from its recorded inputs.
    void replay();

    // Reverse sweep from a scalar node; returns dseed/dtheta.
    Eigen::VectorXd backward(int seed) const;

  private:
    enum class Op {
        Input, Affine, AffineSvd, Shift, Tanh, Add, Axpb, Mul, Concat,
        CdrResidual, HelmholtzResidual, GatherValue, PairDiff, SquaredMean,
        WeightedSum
    };

    struct Node {
        Op op;
        int a = -1, b = -1;
        JetDims dims;
        int batch = 0;
        Index width = 0;
        Eigen::MatrixXd out;
        Eigen::MatrixXd aux;  // Tanh: (sp, spp) column pair per point
        LayerSlice layer;
        SvdLayerSlices svd;
        bool trainable = true;
        std::vector<int> idx;
        std::vector<double> dat;
    };

    int push(Node n);
    void compute(Node& n);
    const Node& at(int i) const;

    const Eigen::VectorXd* theta_;
    std::vector<Node> nodes_;
};

}  // namespace pinnlab
