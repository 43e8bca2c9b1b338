#include "pinnlab/nets.hpp"

#include <cmath>
#include <random>

namespace pinnlab {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::PINN: return "PINN";
        case Variant::PINN_R: return "PINN-R";
        case Variant::PINN_P: return "PINN-P";
        case Variant::LargePINN: return "LargePINN";
        case Variant::P2INN: return "P2INN";
    }
    throw ConfigError("to_string: bad variant");
}

Variant variant_from_string(const std::string& s) {
    if (s == "PINN" || s == "pinn") return Variant::PINN;
    if (s == "PINN-R" || s == "pinn-r" || s == "pinn_r") return Variant::PINN_R;
    if (s == "PINN-P" || s == "pinn-p" || s == "pinn_p") return Variant::PINN_P;
    if (s == "LargePINN" || s == "large_pinn" || s == "largepinn")
        return Variant::LargePINN;
    if (s == "P2INN" || s == "p2inn") return Variant::P2INN;
    throw ConfigError("unknown network variant: " + s);
}

void NetworkSpec::validate() const {
    if (coord_dim < 1) throw ConfigError("NetworkSpec: coord_dim < 1");
    if (variant == Variant::P2INN) {
        if (mu_dim < 1) throw ConfigError("NetworkSpec: P2INN needs mu_dim >= 1");
        if (dp < 1 || dc < 1 || dg < 2)
            throw ConfigError("NetworkSpec: P2INN depths out of range");
        if (hidden < 1 || hidden_p < 1)
            throw ConfigError("NetworkSpec: P2INN widths out of range");
    } else {
        if (layers < 2) throw ConfigError("NetworkSpec: needs at least 2 layers");
        if (hidden < 1) throw ConfigError("NetworkSpec: hidden < 1");
        if (variant == Variant::PINN_P && mu_dim < 1)
            throw ConfigError("NetworkSpec: PINN-P needs mu_dim >= 1");
    }
}

namespace {

// Appends a chain of (rows, cols) FC slices to the table.
void append_chain(std::vector<LayerSlice>& table, Index& off,
                  const std::vector<std::pair<Index, Index>>& shapes) {
    for (auto [rows, cols] : shapes) {
        LayerSlice l;
        l.rows = rows;
        l.cols = cols;
        l.w_off = off;
        off += rows * cols;
        l.b_off = off;
        off += rows;
        table.push_back(l);
    }
}

std::vector<std::pair<Index, Index>> baseline_shapes(const NetworkSpec& s) {
    std::vector<std::pair<Index, Index>> shapes;
    shapes.emplace_back(s.hidden, s.input_dim());
    for (int i = 0; i < s.layers - 2; ++i) shapes.emplace_back(s.hidden, s.hidden);
    shapes.emplace_back(1, s.hidden);
    return shapes;
}

}  // namespace

std::vector<LayerSlice> layer_table(const NetworkSpec& spec, int* p_count,
                                    int* c_count, int* g_count) {
    spec.validate();
    std::vector<LayerSlice> table;
    Index off = 0;
    int pc = 0, cc = 0, gc = 0;
    if (spec.is_p2inn()) {
        std::vector<std::pair<Index, Index>> p_shapes;
        p_shapes.emplace_back(spec.hidden_p, spec.mu_dim);
        for (int i = 0; i < spec.dp - 1; ++i)
            p_shapes.emplace_back(spec.hidden_p, spec.hidden_p);
        append_chain(table, off, p_shapes);
        pc = static_cast<int>(p_shapes.size());

        std::vector<std::pair<Index, Index>> c_shapes;
        c_shapes.emplace_back(spec.hidden, spec.coord_dim);
        for (int i = 0; i < spec.dc - 1; ++i)
            c_shapes.emplace_back(spec.hidden, spec.hidden);
        append_chain(table, off, c_shapes);
        cc = static_cast<int>(c_shapes.size());

        std::vector<std::pair<Index, Index>> g_shapes;
        g_shapes.emplace_back(spec.hidden, spec.hidden + spec.hidden_p);
        for (int i = 0; i < spec.dg - 2; ++i)
            g_shapes.emplace_back(spec.hidden, spec.hidden);
        g_shapes.emplace_back(1, spec.hidden);
        append_chain(table, off, g_shapes);
        gc = static_cast<int>(g_shapes.size());
    } else {
        append_chain(table, off, baseline_shapes(spec));
    }
    if (p_count) *p_count = pc;
    if (c_count) *c_count = cc;
    if (g_count) *g_count = gc;
    return table;
}

Index count_params(const NetworkSpec& spec) {
    Index total = 0;
    for (const auto& l : layer_table(spec)) total += l.size();
    return total;
}

NetworkWeights init_weights(const NetworkSpec& spec, uint64_t seed) {
    NetworkWeights w;
    w.spec = spec;
    w.layer = layer_table(spec, &w.p_count, &w.c_count, &w.g_count);
    w.theta = Eigen::VectorXd::Zero(count_params(spec));
    std::mt19937_64 rng(seed);
    for (const auto& l : w.layer) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.rows + l.cols));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Index i = 0; i < l.rows * l.cols; ++i) w.theta[l.w_off + i] = dist(rng);
        // biases stay zero
    }
    return w;
}

int forward_baseline(Tape& tape, const NetworkWeights& w, int input_node,
                     bool trainable, bool skips_enabled) {
    const NetworkSpec& s = w.spec;
    if (s.is_p2inn()) throw ConfigError("forward_baseline: use forward_p2inn");
    const bool skips = s.variant == Variant::PINN_R && skips_enabled;
    int h = input_node;
    const int n = static_cast<int>(w.layer.size());
    for (int i = 0; i < n; ++i) {
        const LayerSlice& l = w.layer[static_cast<size_t>(i)];
        int z = tape.affine(h, l, trainable);
        if (i == n - 1) return z;  // linear head
        int a = tape.activate_tanh(z);
        h = (skips && l.rows == l.cols) ? tape.add(a, h) : a;
    }
    return h;
}

P2innForward forward_p2inn(Tape& tape, const NetworkWeights& w, int coord_node,
                           int mu_node, const std::vector<int>& point_to_mu,
                           const P2innForwardOptions& opt) {
    const NetworkSpec& s = w.spec;
    if (!s.is_p2inn()) throw ConfigError("forward_p2inn: spec is not P2INN");
    const bool frozen = opt.decoder_shifts != nullptr;
    const bool train = opt.trainable && !frozen;
    if (opt.decoder_shifts &&
        static_cast<int>(opt.decoder_shifts->size()) != w.g_count - 1)
        throw ConfigError("forward_p2inn: need one shift per decoder hidden layer");

    P2innForward r;
    int h = mu_node;
    for (int i = 0; i < w.p_count; ++i)
        h = tape.activate_tanh(tape.affine(h, w.p_layer(i), train));
    r.h_param = h;

    h = coord_node;
    for (int i = 0; i < w.c_count; ++i)
        h = tape.activate_tanh(tape.affine(h, w.c_layer(i), train));
    r.h_coord = h;

    h = tape.concat(r.h_coord, r.h_param, point_to_mu);
    for (int i = 0; i < w.g_count; ++i) {
        int z = tape.affine(h, w.g_layer(i), train);
        if (i == w.g_count - 1) {
            r.out = z;  // linear head
            return r;
        }
        if (opt.decoder_shifts)
            z = tape.shift(z, (*opt.decoder_shifts)[static_cast<size_t>(i)], true);
        h = tape.activate_tanh(z);
    }
    return r;
}

double eval_scalar(const NetworkWeights& w, const std::vector<double>& coord,
                   const std::vector<double>& mu) {
    Tape tape(w.theta);
    Eigen::MatrixXd cm(static_cast<Index>(coord.size()), 1);
    for (size_t i = 0; i < coord.size(); ++i) cm(static_cast<Index>(i), 0) = coord[i];
    if (w.spec.is_p2inn()) {
        Eigen::MatrixXd mm(static_cast<Index>(mu.size()), 1);
        for (size_t i = 0; i < mu.size(); ++i) mm(static_cast<Index>(i), 0) = mu[i];
        int c = tape.input(cm, JetDims::plain(), 1);
        int m = tape.input(mm, JetDims::plain(), 1);
        auto f = forward_p2inn(tape, w, c, m, {0});
        return tape.out(f.out)(0, 0);
    }
    if (!mu.empty()) {
        Eigen::MatrixXd full(cm.rows() + static_cast<Index>(mu.size()), 1);
        full.topRows(cm.rows()) = cm;
        for (size_t i = 0; i < mu.size(); ++i)
            full(cm.rows() + static_cast<Index>(i), 0) = mu[i];
        cm = full;
    }
    int in = tape.input(cm, JetDims::plain(), 1);
    int out = forward_baseline(tape, w, in);
    return tape.out(out)(0, 0);
}

}  // namespace pinnlab
