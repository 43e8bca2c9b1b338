#pragma once

#include <Eigen/Dense>

namespace pinnlab {

using Index = Eigen::Index;

// One fully-connected layer inside a flat parameter vector:
// weight matrix (rows x cols) stored column-major at w_off, bias at b_off.
struct LayerSlice {
    Index w_off = 0;
    Index rows = 0;
    Index cols = 0;
    Index b_off = -1;  // -1: no bias

    Index size() const { return rows * cols + (b_off >= 0 ? rows : 0); }
};

inline Eigen::Map<const Eigen::MatrixXd> weight_of(const Eigen::VectorXd& theta,
                                                   const LayerSlice& l) {
    return {theta.data() + l.w_off, l.rows, l.cols};
}

inline Eigen::Map<const Eigen::VectorXd> bias_of(const Eigen::VectorXd& theta,
                                                 const LayerSlice& l) {
    return {theta.data() + l.b_off, l.rows};
}

}  // namespace pinnlab
