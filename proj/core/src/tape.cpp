#include "pinnlab/tape.hpp"

#include <cmath>
#include <utility>

namespace pinnlab {

namespace {

void check_node(int id, int n, const char* who) {
    if (id < 0 || id >= n) throw UsageError(std::string(who) + ": bad node id");
}

}  // namespace

const Tape::Node& Tape::at(int i) const { return nodes_[static_cast<size_t>(i)]; }

int Tape::push(Node n) {
    compute(n);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Eigen::MatrixXd jets, JetDims dims, int batch) {
    const int C = dims.comps();
    if (jets.cols() != static_cast<Index>(batch) * C)
        throw ConfigError("Tape::input: matrix cols do not match batch*comps");
    Node n;
    n.op = Op::Input;
    n.dims = dims;
    n.batch = batch;
    n.width = jets.rows();
    n.out = std::move(jets);
    return push(std::move(n));
}

int Tape::input(const std::vector<Jet2>& jets) {
    if (jets.empty()) throw ConfigError("Tape::input: empty jet vector");
    const JetDims d = jets.front().dims;
    const int C = d.comps();
    Eigen::MatrixXd m(static_cast<Index>(jets.size()), C);
    for (size_t r = 0; r < jets.size(); ++r) {
        if (!(jets[r].dims == d)) throw ConfigError("Tape::input: mixed jet dims");
        m(static_cast<Index>(r), 0) = jets[r].value;
        for (int i = 0; i < d.n1; ++i) m(static_cast<Index>(r), 1 + i) = jets[r].d1[i];
        for (int i = 0; i < d.n2; ++i)
            m(static_cast<Index>(r), 1 + d.n1 + i) = jets[r].d2[i];
    }
    return input(std::move(m), d, 1);
}

std::vector<Jet2> Tape::jets_of(int node) const {
    check_node(node, size(), "jets_of");
    const Node& n = at(node);
    const int C = n.dims.comps();
    std::vector<Jet2> res;
    for (int p = 0; p < n.batch; ++p)
        for (Index r = 0; r < n.width; ++r) {
            Jet2 j(n.out(r, p * C), n.dims);
            for (int i = 0; i < n.dims.n1; ++i) j.d1[i] = n.out(r, p * C + 1 + i);
            for (int i = 0; i < n.dims.n2; ++i)
                j.d2[i] = n.out(r, p * C + 1 + n.dims.n1 + i);
            res.push_back(j);
        }
    return res;
}

int Tape::affine(int x, const LayerSlice& layer, bool trainable) {
    check_node(x, size(), "affine");
    const Node& in = at(x);
    if (layer.cols != in.width)
        throw ConfigError("affine: weight columns != input width");
    Node n;
    n.op = Op::Affine;
    n.a = x;
    n.dims = in.dims;
    n.batch = in.batch;
    n.width = layer.rows;
    n.layer = layer;
    n.trainable = trainable;
    return push(std::move(n));
}

int Tape::affine_svd(int x, const SvdLayerSlices& s, bool alpha_trainable) {
    check_node(x, size(), "affine_svd");
    const Node& in = at(x);
    if (s.phi.rows != in.width)
        throw ConfigError("affine_svd: Phi rows != input width");
    if (s.psi.cols != s.alpha_len || s.phi.cols != s.alpha_len)
        throw ConfigError("affine_svd: factor rank mismatch");
    Node n;
    n.op = Op::AffineSvd;
    n.a = x;
    n.dims = in.dims;
    n.batch = in.batch;
    n.width = s.psi.rows;
    n.svd = s;
    n.trainable = alpha_trainable;
    return push(std::move(n));
}

int Tape::shift(int x, const LayerSlice& s, bool trainable) {
    check_node(x, size(), "shift");
    const Node& in = at(x);
    if (s.rows != in.width) throw ConfigError("shift: vector length != width");
    Node n;
    n.op = Op::Shift;
    n.a = x;
    n.dims = in.dims;
    n.batch = in.batch;
    n.width = in.width;
    n.layer = s;
    n.trainable = trainable;
    return push(std::move(n));
}

int Tape::activate_tanh(int x) {
    check_node(x, size(), "activate_tanh");
    const Node& in = at(x);
    Node n;
    n.op = Op::Tanh;
    n.a = x;
    n.dims = in.dims;
    n.batch = in.batch;
    n.width = in.width;
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    check_node(a, size(), "add");
    check_node(b, size(), "add");
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.width != nb.width || na.batch != nb.batch || !(na.dims == nb.dims))
        throw ConfigError("add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.dims = na.dims;
    n.batch = na.batch;
    n.width = na.width;
    return push(std::move(n));
}

int Tape::axpb(int x, double a, double b) {
    check_node(x, size(), "axpb");
    const Node& in = at(x);
    Node n;
    n.op = Op::Axpb;
    n.a = x;
    n.dims = in.dims;
    n.batch = in.batch;
    n.width = in.width;
    n.dat = {a, b};
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    check_node(a, size(), "mul");
    check_node(b, size(), "mul");
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.width != nb.width || na.batch != nb.batch || !(na.dims == nb.dims))
        throw ConfigError("mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.dims = na.dims;
    n.batch = na.batch;
    n.width = na.width;
    return push(std::move(n));
}

int Tape::concat(int jets, int plain, std::vector<int> point_to_block) {
    check_node(jets, size(), "concat");
    check_node(plain, size(), "concat");
    const Node& nj = at(jets);
    const Node& np = at(plain);
    if (np.dims.comps() != 1) throw ConfigError("concat: code part must be plain");
    if (static_cast<int>(point_to_block.size()) != nj.batch)
        throw ConfigError("concat: point map size != batch");
    for (int k : point_to_block)
        if (k < 0 || k >= np.batch) throw ConfigError("concat: map entry out of range");
    Node n;
    n.op = Op::Concat;
    n.a = jets;
    n.b = plain;
    n.dims = nj.dims;
    n.batch = nj.batch;
    n.width = nj.width + np.width;
    n.idx = std::move(point_to_block);
    return push(std::move(n));
}

int Tape::cdr_residual(int u, int reaction, std::vector<CdrCoef> coefs) {
    check_node(u, size(), "cdr_residual");
    check_node(reaction, size(), "cdr_residual");
    const Node& nu = at(u);
    if (nu.width != 1 || !(nu.dims == JetDims::cdr()))
        throw ConfigError("cdr_residual: needs width-1 jets tracking (x,t) with d2 in x");
    for (const auto& c : coefs)
        if (c.point < 0 || c.point >= nu.batch)
            throw ConfigError("cdr_residual: point out of range");
    Node n;
    n.op = Op::CdrResidual;
    n.a = u;
    n.b = reaction;
    n.batch = static_cast<int>(coefs.size());
    n.width = 1;
    for (const auto& c : coefs) {
        n.idx.push_back(c.point);
        n.dat.insert(n.dat.end(), {c.beta, c.nu, c.rho});
    }
    return push(std::move(n));
}

int Tape::helmholtz_residual(int u, std::vector<HelmholtzCoef> coefs) {
    check_node(u, size(), "helmholtz_residual");
    const Node& nu = at(u);
    if (nu.width != 1 || !(nu.dims == JetDims::helmholtz()))
        throw ConfigError("helmholtz_residual: needs width-1 jets with d2 in both directions");
    for (const auto& c : coefs)
        if (c.point < 0 || c.point >= nu.batch)
            throw ConfigError("helmholtz_residual: point out of range");
    Node n;
    n.op = Op::HelmholtzResidual;
    n.a = u;
    n.batch = static_cast<int>(coefs.size());
    n.width = 1;
    for (const auto& c : coefs) {
        n.idx.push_back(c.point);
        n.dat.insert(n.dat.end(), {c.k2, c.q});
    }
    return push(std::move(n));
}

int Tape::gather_value(int x, std::vector<int> points) {
    check_node(x, size(), "gather_value");
    const Node& nx = at(x);
    if (nx.width != 1) throw ConfigError("gather_value: width must be 1");
    for (int p : points)
        if (p < 0 || p >= nx.batch) throw ConfigError("gather_value: point out of range");
    Node n;
    n.op = Op::GatherValue;
    n.a = x;
    n.batch = static_cast<int>(points.size());
    n.width = 1;
    n.idx = std::move(points);
    return push(std::move(n));
}

int Tape::pair_diff(int x, std::vector<int> pairs) {
    check_node(x, size(), "pair_diff");
    const Node& nx = at(x);
    if (nx.width != 1) throw ConfigError("pair_diff: width must be 1");
    if (pairs.size() % 2 != 0) throw ConfigError("pair_diff: odd pair list");
    for (int p : pairs)
        if (p < 0 || p >= nx.batch) throw ConfigError("pair_diff: point out of range");
    Node n;
    n.op = Op::PairDiff;
    n.a = x;
    n.batch = static_cast<int>(pairs.size() / 2);
    n.width = 1;
    n.idx = std::move(pairs);
    return push(std::move(n));
}

int Tape::squared_mean(int plain, std::vector<double> targets) {
    check_node(plain, size(), "squared_mean");
    const Node& np = at(plain);
    if (np.out.rows() != 1) throw ConfigError("squared_mean: input must be a plain row");
    if (np.out.cols() == 0) throw ConfigError("squared_mean: empty point set");
    if (!targets.empty() && static_cast<Index>(targets.size()) != np.out.cols())
        throw ConfigError("squared_mean: target length mismatch");
    Node n;
    n.op = Op::SquaredMean;
    n.a = plain;
    n.batch = 1;
    n.width = 1;
    n.dat = std::move(targets);
    return push(std::move(n));
}

int Tape::weighted_sum(std::vector<int> scalars, std::vector<double> coeffs) {
    if (scalars.size() != coeffs.size() || scalars.empty())
        throw ConfigError("weighted_sum: size mismatch");
    for (int s : scalars) {
        check_node(s, size(), "weighted_sum");
        if (at(s).out.size() != 1) throw ConfigError("weighted_sum: inputs must be scalars");
    }
    Node n;
    n.op = Op::WeightedSum;
    n.batch = 1;
    n.width = 1;
    n.idx = std::move(scalars);
    n.dat = std::move(coeffs);
    return push(std::move(n));
}

double Tape::value(int node) const {
    check_node(node, size(), "value");
    const Node& n = at(node);
    if (n.out.size() != 1) throw UsageError("value: node is not a scalar");
    return n.out(0, 0);
}

void Tape::compute(Node& n) {
    const Eigen::VectorXd& th = *theta_;
    const int C = n.dims.comps();
    switch (n.op) {
        case Op::Input:
            break;
        case Op::Affine: {
            const Node& x = at(n.a);
            n.out.noalias() = weight_of(th, n.layer) * x.out;
            if (n.layer.b_off >= 0) {
                auto b = bias_of(th, n.layer);
                for (int p = 0; p < n.batch; ++p) n.out.col(p * C) += b;
            }
            break;
        }
        case Op::AffineSvd: {
            const Node& x = at(n.a);
            auto psi = Eigen::Map<const Eigen::MatrixXd>(th.data() + n.svd.psi.w_off,
                                                         n.svd.psi.rows, n.svd.psi.cols);
            auto phi = Eigen::Map<const Eigen::MatrixXd>(th.data() + n.svd.phi.w_off,
                                                         n.svd.phi.rows, n.svd.phi.cols);
            auto alpha = Eigen::Map<const Eigen::VectorXd>(th.data() + n.svd.alpha_off,
                                                           n.svd.alpha_len);
            n.aux.noalias() = phi.transpose() * x.out;  // Z, kept for backward
            n.out.noalias() = psi * (alpha.asDiagonal() * n.aux);
            if (n.svd.b_off >= 0) {
                auto b = Eigen::Map<const Eigen::VectorXd>(th.data() + n.svd.b_off,
                                                           n.svd.b_len);
                for (int p = 0; p < n.batch; ++p) n.out.col(p * C) += b;
            }
            break;
        }
        case Op::Shift: {
            const Node& x = at(n.a);
            n.out = x.out;
            auto s = Eigen::Map<const Eigen::VectorXd>(th.data() + n.layer.b_off,
                                                       n.layer.rows);
            for (int p = 0; p < n.batch; ++p) n.out.col(p * C) += s;
            break;
        }
        case Op::Tanh: {
            const Node& x = at(n.a);
            n.out.resize(n.width, x.out.cols());
            n.aux.resize(n.width, 2 * n.batch);
            for (int p = 0; p < n.batch; ++p) {
                auto v = x.out.col(p * C).array();
                Eigen::ArrayXd s = v.tanh();
                Eigen::ArrayXd sp = 1.0 - s * s;
                Eigen::ArrayXd spp = -2.0 * s * sp;
                n.out.col(p * C) = s.matrix();
                n.aux.col(2 * p) = sp.matrix();
                n.aux.col(2 * p + 1) = spp.matrix();
                for (int i = 0; i < n.dims.n1; ++i)
                    n.out.col(p * C + 1 + i) =
                        (sp * x.out.col(p * C + 1 + i).array()).matrix();
                for (int i = 0; i < n.dims.n2; ++i) {
                    auto d1 = x.out.col(p * C + 1 + i).array();
                    auto d2 = x.out.col(p * C + 1 + n.dims.n1 + i).array();
                    n.out.col(p * C + 1 + n.dims.n1 + i) =
                        (spp * d1 * d1 + sp * d2).matrix();
                }
            }
            break;
        }
        case Op::Add:
            n.out = at(n.a).out + at(n.b).out;
            break;
        case Op::Axpb: {
            n.out = n.dat[0] * at(n.a).out;
            for (int p = 0; p < n.batch; ++p)
                n.out.col(p * C).array() += n.dat[1];
            break;
        }
        case Op::Mul: {
            const Node& a = at(n.a);
            const Node& b = at(n.b);
            n.out.resize(n.width, a.out.cols());
            for (int p = 0; p < n.batch; ++p) {
                auto va = a.out.col(p * C).array();
                auto vb = b.out.col(p * C).array();
                n.out.col(p * C) = (va * vb).matrix();
                for (int i = 0; i < n.dims.n1; ++i) {
                    auto da = a.out.col(p * C + 1 + i).array();
                    auto db = b.out.col(p * C + 1 + i).array();
                    n.out.col(p * C + 1 + i) = (va * db + vb * da).matrix();
                }
                for (int i = 0; i < n.dims.n2; ++i) {
                    auto da = a.out.col(p * C + 1 + i).array();
                    auto db = b.out.col(p * C + 1 + i).array();
                    auto d2a = a.out.col(p * C + 1 + n.dims.n1 + i).array();
                    auto d2b = b.out.col(p * C + 1 + n.dims.n1 + i).array();
                    n.out.col(p * C + 1 + n.dims.n1 + i) =
                        (va * d2b + 2.0 * da * db + vb * d2a).matrix();
                }
            }
            break;
        }
        case Op::Concat: {
            const Node& j = at(n.a);
            const Node& h = at(n.b);
            n.out.setZero(n.width, j.out.cols());
            n.out.topRows(j.width) = j.out;
            for (int p = 0; p < n.batch; ++p)
                n.out.col(p * C).tail(h.width) = h.out.col(n.idx[p]);
            break;
        }
        case Op::CdrResidual: {
            const Node& u = at(n.a);
            const Node& w = at(n.b);
            const int CU = u.dims.comps();
            n.out.resize(1, n.batch);
            for (int q = 0; q < n.batch; ++q) {
                const int p = n.idx[q];
                const double beta = n.dat[3 * q], nu = n.dat[3 * q + 1],
                             rho = n.dat[3 * q + 2];
                const double ux = u.out(0, p * CU + 1);
                const double ut = u.out(0, p * CU + 2);
                const double uxx = u.out(0, p * CU + 3);
                const double wv = w.out(0, p * CU);
                n.out(0, q) = ut + beta * ux - nu * uxx - rho * wv;
            }
            break;
        }
        case Op::HelmholtzResidual: {
            const Node& u = at(n.a);
            const int CU = u.dims.comps();
            n.out.resize(1, n.batch);
            for (int q = 0; q < n.batch; ++q) {
                const int p = n.idx[q];
                const double k2 = n.dat[2 * q], qsrc = n.dat[2 * q + 1];
                const double uxx = u.out(0, p * CU + 3);
                const double uyy = u.out(0, p * CU + 4);
                n.out(0, q) = uxx + uyy + k2 * u.out(0, p * CU) - qsrc;
            }
            break;
        }
        case Op::GatherValue: {
            const Node& x = at(n.a);
            const int CX = x.dims.comps();
            n.out.resize(1, n.batch);
            for (int q = 0; q < n.batch; ++q) n.out(0, q) = x.out(0, n.idx[q] * CX);
            break;
        }
        case Op::PairDiff: {
            const Node& x = at(n.a);
            const int CX = x.dims.comps();
            n.out.resize(1, n.batch);
            for (int q = 0; q < n.batch; ++q)
                n.out(0, q) =
                    x.out(0, n.idx[2 * q] * CX) - x.out(0, n.idx[2 * q + 1] * CX);
            break;
        }
        case Op::SquaredMean: {
            const Node& x = at(n.a);
            double acc = 0.0;
            for (Index i = 0; i < x.out.cols(); ++i) {
                const double t = n.dat.empty() ? 0.0 : n.dat[static_cast<size_t>(i)];
                const double d = x.out(0, i) - t;
                acc += d * d;
            }
            n.out.resize(1, 1);
            n.out(0, 0) = acc / static_cast<double>(x.out.cols());
            break;
        }
        case Op::WeightedSum: {
            double acc = 0.0;
            for (size_t i = 0; i < n.idx.size(); ++i)
                acc += n.dat[i] * at(n.idx[i]).out(0, 0);
            n.out.resize(1, 1);
            n.out(0, 0) = acc;
            break;
        }
    }
}

void Tape::replay() {
    for (auto& n : nodes_)
        if (n.op != Op::Input) compute(n);
}

Eigen::VectorXd Tape::backward(int seed) const {
    if (nodes_.empty()) throw UsageError("backward: empty tape");
    check_node(seed, size(), "backward");
    if (at(seed).out.size() != 1)
        throw UsageError("backward: seed must be a scalar node");

    const Eigen::VectorXd& th = *theta_;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(th.size());
    std::vector<Eigen::MatrixXd> adj(nodes_.size());
    auto bar = [&](int i) -> Eigen::MatrixXd& {
        auto& m = adj[static_cast<size_t>(i)];
        if (m.size() == 0) m.setZero(at(i).out.rows(), at(i).out.cols());
        return m;
    };
    bar(seed)(0, 0) = 1.0;

    for (int i = seed; i >= 0; --i) {
        const Node& n = at(i);
        const Eigen::MatrixXd& yb = adj[static_cast<size_t>(i)];
        if (yb.size() == 0) continue;
        const int C = n.dims.comps();
        switch (n.op) {
            case Op::Input:
                break;
            case Op::Affine: {
                const Node& x = at(n.a);
                bar(n.a).noalias() += weight_of(th, n.layer).transpose() * yb;
                if (n.trainable) {
                    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + n.layer.w_off,
                                                   n.layer.rows, n.layer.cols);
                    gw.noalias() += yb * x.out.transpose();
                    if (n.layer.b_off >= 0) {
                        Eigen::Map<Eigen::VectorXd> gb(grad.data() + n.layer.b_off,
                                                       n.layer.rows);
                        for (int p = 0; p < n.batch; ++p) gb += yb.col(p * C);
                    }
                }
                break;
            }
            case Op::AffineSvd: {
                auto psi = Eigen::Map<const Eigen::MatrixXd>(
                    th.data() + n.svd.psi.w_off, n.svd.psi.rows, n.svd.psi.cols);
                auto phi = Eigen::Map<const Eigen::MatrixXd>(
                    th.data() + n.svd.phi.w_off, n.svd.phi.rows, n.svd.phi.cols);
                auto alpha = Eigen::Map<const Eigen::VectorXd>(
                    th.data() + n.svd.alpha_off, n.svd.alpha_len);
                Eigen::MatrixXd t = psi.transpose() * yb;
                if (n.trainable) {
                    Eigen::Map<Eigen::VectorXd> ga(grad.data() + n.svd.alpha_off,
                                                   n.svd.alpha_len);
                    ga.noalias() += (t.array() * n.aux.array()).rowwise().sum().matrix();
                }
                bar(n.a).noalias() += phi * (alpha.asDiagonal() * t);
                break;
            }
            case Op::Shift: {
                bar(n.a) += yb;
                if (n.trainable) {
                    Eigen::Map<Eigen::VectorXd> gs(grad.data() + n.layer.b_off,
                                                   n.layer.rows);
                    for (int p = 0; p < n.batch; ++p) gs += yb.col(p * C);
                }
                break;
            }
            case Op::Tanh: {
                const Node& x = at(n.a);
                Eigen::MatrixXd& xb = bar(n.a);
                for (int p = 0; p < n.batch; ++p) {
                    auto s = n.out.col(p * C).array();
                    auto sp = n.aux.col(2 * p).array();
                    auto spp = n.aux.col(2 * p + 1).array();
                    Eigen::ArrayXd sppp = -2.0 * (sp * sp + s * spp);
                    Eigen::ArrayXd vb = sp * yb.col(p * C).array();
                    for (int i = 0; i < n.dims.n1; ++i) {
                        auto d1 = x.out.col(p * C + 1 + i).array();
                        auto y1 = yb.col(p * C + 1 + i).array();
                        vb += spp * d1 * y1;
                        xb.col(p * C + 1 + i).array() += sp * y1;
                    }
                    for (int i = 0; i < n.dims.n2; ++i) {
                        auto d1 = x.out.col(p * C + 1 + i).array();
                        auto d2 = x.out.col(p * C + 1 + n.dims.n1 + i).array();
                        auto y2 = yb.col(p * C + 1 + n.dims.n1 + i).array();
                        vb += (sppp * d1 * d1 + spp * d2) * y2;
                        xb.col(p * C + 1 + i).array() += 2.0 * spp * d1 * y2;
                        xb.col(p * C + 1 + n.dims.n1 + i).array() += sp * y2;
                    }
                    xb.col(p * C).array() += vb;
                }
                break;
            }
            case Op::Add:
                bar(n.a) += yb;
                bar(n.b) += yb;
                break;
            case Op::Axpb:
                bar(n.a) += n.dat[0] * yb;
                break;
            case Op::Mul: {
                const Node& a = at(n.a);
                const Node& b = at(n.b);
                Eigen::MatrixXd& ab = bar(n.a);
                Eigen::MatrixXd& bb = bar(n.b);
                for (int p = 0; p < n.batch; ++p) {
                    auto va = a.out.col(p * C).array();
                    auto vb_ = b.out.col(p * C).array();
                    auto yv = yb.col(p * C).array();
                    Eigen::ArrayXd va_bar = vb_ * yv;
                    Eigen::ArrayXd vb_bar = va * yv;
                    for (int i = 0; i < n.dims.n1; ++i) {
                        auto da = a.out.col(p * C + 1 + i).array();
                        auto db = b.out.col(p * C + 1 + i).array();
                        auto y1 = yb.col(p * C + 1 + i).array();
                        va_bar += db * y1;
                        vb_bar += da * y1;
                        ab.col(p * C + 1 + i).array() += vb_ * y1;
                        bb.col(p * C + 1 + i).array() += va * y1;
                    }
                    for (int i = 0; i < n.dims.n2; ++i) {
                        auto da = a.out.col(p * C + 1 + i).array();
                        auto db = b.out.col(p * C + 1 + i).array();
                        auto d2a = a.out.col(p * C + 1 + n.dims.n1 + i).array();
                        auto d2b = b.out.col(p * C + 1 + n.dims.n1 + i).array();
                        auto y2 = yb.col(p * C + 1 + n.dims.n1 + i).array();
                        va_bar += d2b * y2;
                        vb_bar += d2a * y2;
                        ab.col(p * C + 1 + i).array() += 2.0 * db * y2;
                        bb.col(p * C + 1 + i).array() += 2.0 * da * y2;
                        ab.col(p * C + 1 + n.dims.n1 + i).array() += vb_ * y2;
                        bb.col(p * C + 1 + n.dims.n1 + i).array() += va * y2;
                    }
                    ab.col(p * C).array() += va_bar;
                    bb.col(p * C).array() += vb_bar;
                }
                break;
            }
            case Op::Concat: {
                const Node& j = at(n.a);
                const Node& h = at(n.b);
                bar(n.a) += yb.topRows(j.width);
                Eigen::MatrixXd& hb = bar(n.b);
                for (int p = 0; p < n.batch; ++p)
                    hb.col(n.idx[p]) += yb.col(p * C).tail(h.width);
                break;
            }
            case Op::CdrResidual: {
                const int CU = at(n.a).dims.comps();
                Eigen::MatrixXd& ub = bar(n.a);
                Eigen::MatrixXd& wb = bar(n.b);
                for (int q = 0; q < n.batch; ++q) {
                    const int p = n.idx[q];
                    const double g = yb(0, q);
                    ub(0, p * CU + 1) += n.dat[3 * q] * g;        // beta * u_x
                    ub(0, p * CU + 2) += g;                       // u_t
                    ub(0, p * CU + 3) -= n.dat[3 * q + 1] * g;    // -nu * u_xx
                    wb(0, p * CU) -= n.dat[3 * q + 2] * g;        // -rho * u(1-u)
                }
                break;
            }
            case Op::HelmholtzResidual: {
                const int CU = at(n.a).dims.comps();
                Eigen::MatrixXd& ub = bar(n.a);
                for (int q = 0; q < n.batch; ++q) {
                    const int p = n.idx[q];
                    const double g = yb(0, q);
                    ub(0, p * CU) += n.dat[2 * q] * g;
                    ub(0, p * CU + 3) += g;
                    ub(0, p * CU + 4) += g;
                }
                break;
            }
            case Op::GatherValue: {
                const int CX = at(n.a).dims.comps();
                Eigen::MatrixXd& xb = bar(n.a);
                for (int q = 0; q < n.batch; ++q) xb(0, n.idx[q] * CX) += yb(0, q);
                break;
            }
            case Op::PairDiff: {
                const int CX = at(n.a).dims.comps();
                Eigen::MatrixXd& xb = bar(n.a);
                for (int q = 0; q < n.batch; ++q) {
                    xb(0, n.idx[2 * q] * CX) += yb(0, q);
                    xb(0, n.idx[2 * q + 1] * CX) -= yb(0, q);
                }
                break;
            }
            case Op::SquaredMean: {
                const Node& x = at(n.a);
                Eigen::MatrixXd& xb = bar(n.a);
                const double scale = 2.0 * yb(0, 0) / static_cast<double>(x.out.cols());
                for (Index c = 0; c < x.out.cols(); ++c) {
                    const double t = n.dat.empty() ? 0.0 : n.dat[static_cast<size_t>(c)];
                    xb(0, c) += scale * (x.out(0, c) - t);
                }
                break;
            }
            case Op::WeightedSum:
                for (size_t k = 0; k < n.idx.size(); ++k)
                    bar(n.idx[k])(0, 0) += n.dat[k] * yb(0, 0);
                break;
        }
    }
    return grad;
}

}  // namespace pinnlab
