#include "pinnlab/modsvd.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace pinnlab {

void jacobi_svd(const Eigen::MatrixXd& A, Eigen::MatrixXd& U, Eigen::VectorXd& S,
                Eigen::MatrixXd& V) {
    const bool tall = A.rows() >= A.cols();
    if (!tall) {
        // decompose the transpose and swap the factors
        Eigen::MatrixXd Ut, Vt;
        Eigen::VectorXd St;
        jacobi_svd(A.transpose(), Ut, St, Vt);
        U = Vt;
        S = St;
        V = Ut;
        // re-apply the sign convention for the new V
        for (Index j = 0; j < V.cols(); ++j) {
            Index k = 0;
            while (k < V.rows() && V(k, j) == 0.0) ++k;
            if (k < V.rows() && V(k, j) < 0.0) {
                V.col(j) = -V.col(j);
                U.col(j) = -U.col(j);
            }
        }
        return;
    }

    const Index n = A.cols();
    Eigen::MatrixXd B = A;  // columns converge to U * diag(S)
    V = Eigen::MatrixXd::Identity(n, n);

    const double tol = 1e-12;
    const int max_sweeps = 60;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (Index p = 0; p < n - 1; ++p)
            for (Index q = p + 1; q < n; ++q) {
                const double app = B.col(p).squaredNorm();
                const double aqq = B.col(q).squaredNorm();
                const double apq = B.col(p).dot(B.col(q));
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0)
                    continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                Eigen::VectorXd bp = B.col(p);
                B.col(p) = c * bp - s * B.col(q);
                B.col(q) = s * bp + c * B.col(q);
                Eigen::VectorXd vp = V.col(p);
                V.col(p) = c * vp - s * V.col(q);
                V.col(q) = s * vp + c * V.col(q);
            }
    }
    if (!converged)
        throw NumericError("jacobi_svd: no convergence after 60 sweeps (n=" +
                           std::to_string(n) + ")");

    S.resize(n);
    U.resize(A.rows(), n);
    for (Index j = 0; j < n; ++j) {
        S[j] = B.col(j).norm();
        if (S[j] > 0.0)
            U.col(j) = B.col(j) / S[j];
        else
            U.col(j) = Eigen::VectorXd::Unit(A.rows(), j);
    }

    // sort singular values non-increasing
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return S[a] > S[b]; });
    Eigen::MatrixXd Us(U.rows(), n), Vs(n, n);
    Eigen::VectorXd Ss(n);
    for (Index j = 0; j < n; ++j) {
        Us.col(j) = U.col(order[static_cast<size_t>(j)]);
        Vs.col(j) = V.col(order[static_cast<size_t>(j)]);
        Ss[j] = S[order[static_cast<size_t>(j)]];
    }
    U = Us;
    V = Vs;
    S = Ss;

    // sign convention: first nonzero entry of each right singular vector > 0
    for (Index j = 0; j < n; ++j) {
        Index k = 0;
        while (k < n && V(k, j) == 0.0) ++k;
        if (k < n && V(k, j) < 0.0) {
            V.col(j) = -V.col(j);
            U.col(j) = -U.col(j);
        }
    }
}

Index SvdFactors::trainable_count() const {
    Index total = 0;
    for (const auto& l : g_interior) total += l.alpha_len;
    return total;
}

std::vector<std::pair<Index, Index>> SvdFactors::alpha_segments() const {
    std::vector<std::pair<Index, Index>> seg;
    for (const auto& l : g_interior) seg.emplace_back(l.alpha_off, l.alpha_len);
    return seg;
}

SvdFactors factorize_decoder(const NetworkWeights& w) {
    if (!w.spec.is_p2inn())
        throw ConfigError("factorize_decoder: weights are not a P2INN");
    if (w.spec.dg < 3)
        throw ConfigError("factorize_decoder: decoder needs at least 3 layers");

    SvdFactors f;
    f.spec = w.spec;

    // size the store: encoders + first/last decoder layers copied verbatim,
    // interior layers as Psi, alpha, Phi, bias
    Index total = 0;
    for (int i = 0; i < w.p_count; ++i) total += w.p_layer(i).size();
    for (int i = 0; i < w.c_count; ++i) total += w.c_layer(i).size();
    total += w.g_layer(0).size();
    for (int i = 1; i < w.g_count - 1; ++i) {
        const LayerSlice l = w.g_layer(i);
        const Index r = std::min(l.rows, l.cols);
        total += l.rows * r + r + l.cols * r + l.rows;
    }
    total += w.g_layer(w.g_count - 1).size();
    f.store.resize(total);

    Index off = 0;
    auto copy_layer = [&](const LayerSlice& src) {
        LayerSlice dst = src;
        dst.w_off = off;
        f.store.segment(off, src.rows * src.cols) =
            w.theta.segment(src.w_off, src.rows * src.cols);
        off += src.rows * src.cols;
        dst.b_off = off;
        f.store.segment(off, src.rows) = w.theta.segment(src.b_off, src.rows);
        off += src.rows;
        return dst;
    };

    for (int i = 0; i < w.p_count; ++i) f.p_layers.push_back(copy_layer(w.p_layer(i)));
    for (int i = 0; i < w.c_count; ++i) f.c_layers.push_back(copy_layer(w.c_layer(i)));
    f.g_first = copy_layer(w.g_layer(0));

    for (int i = 1; i < w.g_count - 1; ++i) {
        const LayerSlice l = w.g_layer(i);
        const Index r = std::min(l.rows, l.cols);
        Eigen::MatrixXd U, V;
        Eigen::VectorXd S;
        jacobi_svd(weight_of(w.theta, l), U, S, V);

        SvdLayerSlices s;
        s.psi = {off, l.rows, r, -1};
        Eigen::Map<Eigen::MatrixXd>(f.store.data() + off, l.rows, r) = U;
        off += l.rows * r;
        s.alpha_off = off;
        s.alpha_len = r;
        f.store.segment(off, r) = S;
        off += r;
        s.phi = {off, l.cols, r, -1};
        Eigen::Map<Eigen::MatrixXd>(f.store.data() + off, l.cols, r) = V;
        off += l.cols * r;
        s.b_off = off;
        s.b_len = l.rows;
        f.store.segment(off, l.rows) = w.theta.segment(l.b_off, l.rows);
        off += l.rows;
        f.g_interior.push_back(s);
    }

    f.g_last = copy_layer(w.g_layer(w.g_count - 1));
    return f;
}

P2innForward forward_modulated(Tape& tape, const SvdFactors& f, int coord_node,
                               int mu_node, const std::vector<int>& point_to_mu) {
    P2innForward r;
    int h = mu_node;
    for (const auto& l : f.p_layers)
        h = tape.activate_tanh(tape.affine(h, l, /*trainable=*/false));
    r.h_param = h;

    h = coord_node;
    for (const auto& l : f.c_layers)
        h = tape.activate_tanh(tape.affine(h, l, /*trainable=*/false));
    r.h_coord = h;

    h = tape.concat(r.h_coord, r.h_param, point_to_mu);
    h = tape.activate_tanh(tape.affine(h, f.g_first, /*trainable=*/false));
    for (const auto& s : f.g_interior)
        h = tape.activate_tanh(tape.affine_svd(h, s, /*alpha_trainable=*/true));
    r.out = tape.affine(h, f.g_last, /*trainable=*/false);
    return r;
}

void save_factors(const SvdFactors& f, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_factors: cannot open " + path.string());
    os << "pinnlab-factors 1\n";
    os << "variant " << to_string(f.spec.variant) << "\n"
       << "coord_dim " << f.spec.coord_dim << "\n"
       << "mu_dim " << f.spec.mu_dim << "\n"
       << "hidden " << f.spec.hidden << "\n"
       << "layers " << f.spec.layers << "\n"
       << "dp " << f.spec.dp << "\n"
       << "dc " << f.spec.dc << "\n"
       << "dg " << f.spec.dg << "\n"
       << "hidden_p " << f.spec.hidden_p << "\n";
    os << "values " << f.store.size() << "\n";
    char buf[40];
    for (Index i = 0; i < f.store.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", f.store[i]);
        os << buf << "\n";
    }
    os << "end\n";
    if (!os) throw IoError("save_factors: write failure " + path.string());
}

SvdFactors load_factors(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_factors: cannot open " + path.string());
    std::string magic;
    int version = -1;
    if (!(is >> magic >> version)) throw IoError("load_factors: parse error");
    if (magic != "pinnlab-factors" || version != 1)
        throw IoError("load_factors: bad header in " + path.string());

    auto expect = [&](const std::string& key) {
        std::string k, v;
        if (!(is >> k >> v)) throw IoError("load_factors: truncated header");
        if (k != key) throw IoError("load_factors: expected '" + key + "'");
        return v;
    };
    NetworkSpec spec;
    spec.variant = variant_from_string(expect("variant"));
    spec.coord_dim = std::stoi(expect("coord_dim"));
    spec.mu_dim = std::stoi(expect("mu_dim"));
    spec.hidden = std::stoi(expect("hidden"));
    spec.layers = std::stoi(expect("layers"));
    spec.dp = std::stoi(expect("dp"));
    spec.dc = std::stoi(expect("dc"));
    spec.dg = std::stoi(expect("dg"));
    spec.hidden_p = std::stoi(expect("hidden_p"));

    // rebuild the slice layout from the spec, then fill values
    NetworkWeights scaffold = init_weights(spec, 0);
    scaffold.theta.setZero();
    SvdFactors f = factorize_decoder(scaffold);
    f.spec = spec;

    const Index n = std::stoll(expect("values"));
    if (n != f.store.size())
        throw IoError("load_factors: value count does not match spec layout");
    for (Index i = 0; i < n; ++i)
        if (!(is >> f.store[i]))
            throw IoError("load_factors: truncated at value " + std::to_string(i));
    std::string tail;
    if (!(is >> tail) || tail != "end") throw IoError("load_factors: missing end marker");
    return f;
}

}  // namespace pinnlab
