#include "pinnlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace pinnlab {

void TrainConfig::validate() const {
    if (weights.w1 < 0 || weights.w2 < 0 || weights.w3 < 0)
        throw ConfigError("TrainConfig: loss weights must be >= 0");
    if (learning_rate <= 0) throw ConfigError("TrainConfig: learning_rate must be > 0");
    if (iterations < 0) throw ConfigError("TrainConfig: iterations must be >= 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (seq2seq_windows < 1) throw ConfigError("TrainConfig: seq2seq_windows must be >= 1");
    if (finetune_epochs < 0) throw ConfigError("TrainConfig: finetune_epochs must be >= 0");
}

FinetuneMode finetune_mode_from_string(const std::string& s) {
    if (s == "all" || s == "All") return FinetuneMode::All;
    if (s == "shift" || s == "Shift") return FinetuneMode::Shift;
    if (s == "svd" || s == "SVD" || s == "Svd") return FinetuneMode::Svd;
    throw ConfigError("unknown finetune mode: " + s);
}

void save_loss_history(const LossHistory& h, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_loss_history: cannot open " + path.string());
    os.precision(10);
    os << "step\tL_u\tL_f\tL_b\ttotal\n";
    for (const auto& e : h)
        os << e.step << "\t" << e.loss.l_u << "\t" << e.loss.l_f << "\t"
           << e.loss.l_b << "\t" << e.loss.total << "\n";
}

// --- Model ------------------------------------------------------------------

Model Model::plain(NetworkWeights w) {
    Model m;
    m.kind = Kind::Plain;
    m.weights = std::move(w);
    return m;
}

Model Model::shifted(const NetworkWeights& pretrained) {
    if (!pretrained.spec.is_p2inn())
        throw ConfigError("Model::shifted: shift modulation needs a P2INN");
    Model m;
    m.kind = Kind::Shifted;
    m.weights = pretrained;
    Index off = pretrained.theta.size();
    Index extra = 0;
    for (int i = 0; i < pretrained.g_count - 1; ++i)
        extra += pretrained.g_layer(i).rows;
    m.weights.theta.conservativeResize(off + extra);
    m.weights.theta.tail(extra).setZero();
    for (int i = 0; i < pretrained.g_count - 1; ++i) {
        const Index rows = pretrained.g_layer(i).rows;
        LayerSlice s;
        s.rows = rows;
        s.cols = 0;
        s.b_off = off;
        m.shifts.push_back(s);
        off += rows;
    }
    return m;
}

Model Model::svd(const NetworkWeights& pretrained) {
    Model m;
    m.kind = Kind::Svd;
    m.factors = factorize_decoder(pretrained);
    return m;
}

const NetworkSpec& Model::spec() const {
    return kind == Kind::Svd ? factors.spec : weights.spec;
}

const Eigen::VectorXd& Model::theta() const {
    return kind == Kind::Svd ? factors.store : weights.theta;
}

Eigen::VectorXd& Model::theta_mut() {
    return kind == Kind::Svd ? factors.store : weights.theta;
}

std::vector<std::pair<Index, Index>> Model::trainable_segments() const {
    switch (kind) {
        case Kind::Plain:
            return {};
        case Kind::Shifted: {
            std::vector<std::pair<Index, Index>> seg;
            for (const auto& s : shifts) seg.emplace_back(s.b_off, s.rows);
            return seg;
        }
        case Kind::Svd:
            return factors.alpha_segments();
    }
    throw UsageError("Model: bad kind");
}

int Model::forward(Tape& tape, int coord_node, int mu_node,
                   const std::vector<int>& point_to_mu) const {
    switch (kind) {
        case Kind::Plain: {
            const NetworkSpec& s = weights.spec;
            if (s.is_p2inn())
                return forward_p2inn(tape, weights, coord_node, mu_node, point_to_mu)
                    .out;
            if (s.variant == Variant::PINN_P)
                return forward_baseline(
                    tape, weights, tape.concat(coord_node, mu_node, point_to_mu));
            return forward_baseline(tape, weights, coord_node);
        }
        case Kind::Shifted: {
            P2innForwardOptions opt;
            opt.decoder_shifts = &shifts;
            return forward_p2inn(tape, weights, coord_node, mu_node, point_to_mu, opt)
                .out;
        }
        case Kind::Svd:
            return forward_modulated(tape, factors, coord_node, mu_node, point_to_mu)
                .out;
    }
    throw UsageError("Model: bad kind");
}

double Model::eval(const std::vector<double>& coord,
                   const std::vector<double>& mu) const {
    Tape tape(theta());
    Eigen::MatrixXd cm(static_cast<Index>(coord.size()), 1);
    for (size_t i = 0; i < coord.size(); ++i) cm(static_cast<Index>(i), 0) = coord[i];
    int c = tape.input(std::move(cm), JetDims::plain(), 1);
    int m = -1;
    std::vector<int> map{0};
    Eigen::MatrixXd mm(std::max<Index>(static_cast<Index>(mu.size()), 1), 1);
    mm.setZero();
    for (size_t i = 0; i < mu.size(); ++i) mm(static_cast<Index>(i), 0) = mu[i];
    m = tape.input(std::move(mm), JetDims::plain(), 1);
    return tape.out(forward(tape, c, m, map))(0, 0);
}

// --- loss assembly ----------------------------------------------------------

std::vector<BatchItem> full_selection(const std::vector<Dataset>& datasets) {
    std::vector<BatchItem> items;
    for (int i = 0; i < static_cast<int>(datasets.size()); ++i) {
        const Dataset& d = datasets[static_cast<size_t>(i)];
        for (int k = 0; k < static_cast<int>(d.collocation.size()); ++k)
            items.push_back({i, BatchItem::Collocation, k});
        for (int k = 0; k < static_cast<int>(d.initial.size()); ++k)
            items.push_back({i, BatchItem::Initial, k});
        const size_t nb = d.instance.family == PdeFamily::CDR
                              ? d.boundary_times.size()
                              : d.boundary.size();
        for (int k = 0; k < static_cast<int>(nb); ++k)
            items.push_back({i, BatchItem::Boundary, k});
    }
    return items;
}

LossGraph compute_loss(const Model& model, const std::vector<Dataset>& datasets,
                       const std::vector<BatchItem>& selection,
                       const LossWeights& weights, bool require_all_roles) {
    if (datasets.empty()) throw ConfigError("compute_loss: no datasets");
    const PdeFamily family = datasets.front().instance.family;
    for (const auto& d : datasets)
        if (d.instance.family != family)
            throw ConfigError("compute_loss: mixed PDE families");
    const bool cdr = family == PdeFamily::CDR;
    const JetDims dims = cdr ? JetDims::cdr() : JetDims::helmholtz();
    const int C = dims.comps();

    struct FwdPoint {
        double x, y;
        int inst;
    };
    std::vector<FwdPoint> pts;
    std::vector<CdrCoef> cdr_coefs;
    std::vector<HelmholtzCoef> helm_coefs;
    std::vector<int> initial_pts;
    std::vector<double> initial_targets;
    std::vector<int> boundary_pairs;
    std::vector<int> dirichlet_pts;
    std::vector<double> dirichlet_targets;

    for (const auto& it : selection) {
        if (it.instance < 0 || it.instance >= static_cast<int>(datasets.size()))
            throw ConfigError("compute_loss: instance index out of range");
        const Dataset& d = datasets[static_cast<size_t>(it.instance)];
        const auto& mu = d.instance.mu;
        switch (it.role) {
            case BatchItem::Collocation: {
                const auto& p = d.collocation[static_cast<size_t>(it.index)];
                const int id = static_cast<int>(pts.size());
                pts.push_back({p.x, p.y, it.instance});
                if (cdr)
                    cdr_coefs.push_back({id, mu[0], mu[1], mu[2]});
                else
                    helm_coefs.push_back(
                        {id, PdeInstance::k() * PdeInstance::k(),
                         helmholtz_source(d.instance.a(), p.x, p.y)});
                break;
            }
            case BatchItem::Initial: {
                const auto& [x, u0] = d.initial[static_cast<size_t>(it.index)];
                initial_pts.push_back(static_cast<int>(pts.size()));
                pts.push_back({x, d.initial_time, it.instance});
                initial_targets.push_back(u0);
                break;
            }
            case BatchItem::Boundary: {
                if (cdr) {
                    const double t = d.boundary_times[static_cast<size_t>(it.index)];
                    const int left = static_cast<int>(pts.size());
                    pts.push_back({0.0, t, it.instance});
                    pts.push_back({kTwoPi, t, it.instance});
                    boundary_pairs.push_back(left);
                    boundary_pairs.push_back(left + 1);
                } else {
                    const auto& p = d.boundary[static_cast<size_t>(it.index)];
                    dirichlet_pts.push_back(static_cast<int>(pts.size()));
                    pts.push_back({p.x, p.y, it.instance});
                    dirichlet_targets.push_back(p.u);
                }
                break;
            }
        }
    }
    if (pts.empty()) throw ConfigError("compute_loss: empty selection");

    const bool has_u = !initial_pts.empty();
    const bool has_f = cdr ? !cdr_coefs.empty() : !helm_coefs.empty();
    const bool has_b = cdr ? !boundary_pairs.empty() : !dirichlet_pts.empty();
    if (require_all_roles) {
        if (weights.w1 > 0 && !has_u && cdr)
            throw ConfigError("compute_loss: no initial points for active w1");
        if (weights.w2 > 0 && !has_f)
            throw ConfigError("compute_loss: no collocation points for active w2");
        if (weights.w3 > 0 && !has_b)
            throw ConfigError("compute_loss: no boundary points for active w3");
    }

    // distinct instances present, in first-appearance order
    std::vector<int> inst_column(datasets.size(), -1);
    std::vector<int> inst_order;
    for (const auto& p : pts)
        if (inst_column[static_cast<size_t>(p.inst)] < 0) {
            inst_column[static_cast<size_t>(p.inst)] =
                static_cast<int>(inst_order.size());
            inst_order.push_back(p.inst);
        }

    const int npts = static_cast<int>(pts.size());
    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(2, static_cast<Index>(npts) * C);
    for (int p = 0; p < npts; ++p) {
        coords(0, p * C) = pts[static_cast<size_t>(p)].x;
        coords(1, p * C) = pts[static_cast<size_t>(p)].y;
        coords(0, p * C + 1) = 1.0;  // d/dx seed (x first: d2-tracked)
        coords(1, p * C + 2) = 1.0;  // d/dt or d/dy seed
    }

    const int mu_dim = datasets.front().instance.mu_dim();
    Eigen::MatrixXd mus(mu_dim, static_cast<Index>(inst_order.size()));
    for (size_t k = 0; k < inst_order.size(); ++k) {
        const auto mv = datasets[static_cast<size_t>(inst_order[k])].instance.mu_vector();
        for (int i = 0; i < mu_dim; ++i) mus(i, static_cast<Index>(k)) = mv[static_cast<size_t>(i)];
    }
    std::vector<int> point_to_mu(static_cast<size_t>(npts));
    for (int p = 0; p < npts; ++p)
        point_to_mu[static_cast<size_t>(p)] =
            inst_column[static_cast<size_t>(pts[static_cast<size_t>(p)].inst)];

    LossGraph g;
    g.tape = std::make_unique<Tape>(model.theta());
    Tape& tape = *g.tape;
    const int coord_node = tape.input(std::move(coords), dims, npts);
    const int mu_node =
        tape.input(std::move(mus), JetDims::plain(), static_cast<int>(inst_order.size()));
    const int u = model.forward(tape, coord_node, mu_node, point_to_mu);

    std::vector<int> terms;
    std::vector<double> coeffs;
    auto record = [&](int node, double w, double& slot) {
        slot = tape.value(node);
        terms.push_back(node);
        coeffs.push_back(w);
    };

    if (has_u) {
        const int node = tape.squared_mean(tape.gather_value(u, initial_pts),
                                           initial_targets);
        record(node, weights.w1, g.loss.l_u);
    }
    if (has_f) {
        int res;
        if (cdr) {
            const int reaction = tape.mul(u, tape.axpb(u, -1.0, 1.0));
            res = tape.cdr_residual(u, reaction, cdr_coefs);
        } else {
            res = tape.helmholtz_residual(u, helm_coefs);
        }
        record(tape.squared_mean(res), weights.w2, g.loss.l_f);
    }
    if (has_b) {
        const int node = cdr
                             ? tape.squared_mean(tape.pair_diff(u, boundary_pairs))
                             : tape.squared_mean(tape.gather_value(u, dirichlet_pts),
                                                 dirichlet_targets);
        record(node, weights.w3, g.loss.l_b);
    }
    if (terms.empty()) throw ConfigError("compute_loss: no loss terms");
    g.total_node = tape.weighted_sum(terms, coeffs);
    g.loss.total = tape.value(g.total_node);
    return g;
}

// --- optimizer --------------------------------------------------------------

AdamOptimizer::AdamOptimizer(Index dim, double lr,
                             std::vector<std::pair<Index, Index>> segments)
    : lr_(lr),
      m_(Eigen::VectorXd::Zero(dim)),
      v_(Eigen::VectorXd::Zero(dim)),
      segments_(std::move(segments)) {
    if (segments_.empty()) segments_.emplace_back(0, dim);
}

void AdamOptimizer::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    if (theta.size() != m_.size() || grad.size() != m_.size())
        throw UsageError("AdamOptimizer: dimension mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (const auto& [off, len] : segments_) {
        auto m = m_.segment(off, len);
        auto v = v_.segment(off, len);
        auto g = grad.segment(off, len);
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        theta.segment(off, len) -=
            lr_ * (m / bc1).cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps_).matrix());
    }
}

// --- training loops ---------------------------------------------------------

namespace {

LossHistory run_minibatch_training(Model& model, const std::vector<Dataset>& datasets,
                                   const TrainConfig& config, int iterations) {
    config.validate();
    const std::vector<BatchItem> universe = full_selection(datasets);
    if (universe.empty()) throw ConfigError("train: no points to train on");

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<size_t> pick(0, universe.size() - 1);
    AdamOptimizer opt(model.theta().size(), config.learning_rate,
                      model.trainable_segments());
    LossHistory history;
    std::vector<BatchItem> batch(static_cast<size_t>(config.batch_size));
    for (int step = 0; step < iterations; ++step) {
        for (auto& b : batch) b = universe[pick(rng)];
        LossGraph g = compute_loss(model, datasets, batch, config.weights);
        if (!std::isfinite(g.loss.total))
            throw NumericError("training diverged at step " + std::to_string(step) +
                               ": L_u=" + std::to_string(g.loss.l_u) +
                               " L_f=" + std::to_string(g.loss.l_f) +
                               " L_b=" + std::to_string(g.loss.l_b));
        if (step % config.log_every == 0 || step == iterations - 1)
            history.push_back({step, g.loss});
        opt.step(model.theta_mut(), g.tape->backward(g.total_node));
    }
    return history;
}

}  // namespace

LossHistory train_joint(Model& model, const std::vector<Dataset>& datasets,
                        const TrainConfig& config) {
    return run_minibatch_training(model, datasets, config, config.iterations);
}

LossHistory train_per_instance(Model& model, const Dataset& dataset,
                               const TrainConfig& config) {
    return run_minibatch_training(model, {dataset}, config, config.iterations);
}

LossHistory train_seq2seq(Model& model, const Dataset& dataset,
                          const SolutionGrid& grid, const TrainConfig& config) {
    config.validate();
    if (dataset.instance.family != PdeFamily::CDR)
        throw ConfigError("train_seq2seq: CDR only");
    const int W = config.seq2seq_windows;
    const double T = dataset.instance.horizon;
    const auto mu = dataset.instance.mu_vector();
    LossHistory history;
    int step_base = 0;
    for (int w = 0; w < W; ++w) {
        const double t0 = T * w / W;
        const double t1 = T * (w + 1) / W;
        Dataset win;
        win.instance = dataset.instance;
        win.initial_time = t0;
        for (const auto& p : dataset.collocation)
            if (p.y >= t0 && p.y <= t1) win.collocation.push_back(p);
        for (double t : dataset.boundary_times)
            if (t >= t0 && t <= t1) win.boundary_times.push_back(t);
        if (w == 0) {
            win.initial = dataset.initial;
        } else {
            for (int j = 0; j < grid.nx; ++j) {
                const double x = grid.x(j);
                win.initial.emplace_back(x, model.eval({x, t0}, mu));
            }
        }
        TrainConfig wc = config;
        wc.seed = config.seed + static_cast<uint64_t>(w) * 0x9e3779b97f4a7c15ull;
        LossHistory h =
            run_minibatch_training(model, {win}, wc, config.iterations / W);
        for (auto& e : h) history.push_back({e.step + step_base, e.loss});
        step_base += config.iterations / W;
    }
    return history;
}

Model finetune(const NetworkWeights& pretrained, const Dataset& dataset,
               FinetuneMode mode, const TrainConfig& config, LossHistory* history) {
    config.validate();
    Model model = mode == FinetuneMode::All     ? Model::plain(pretrained)
                  : mode == FinetuneMode::Shift ? Model::shifted(pretrained)
                                                : Model::svd(pretrained);
    std::vector<Dataset> datasets{dataset};
    std::vector<BatchItem> items = full_selection(datasets);
    std::mt19937_64 rng(config.seed);
    AdamOptimizer opt(model.theta().size(), config.learning_rate,
                      model.trainable_segments());
    int step = 0;
    for (int epoch = 0; epoch < config.finetune_epochs; ++epoch) {
        std::shuffle(items.begin(), items.end(), rng);
        for (size_t start = 0; start < items.size();
             start += static_cast<size_t>(config.batch_size)) {
            const size_t stop =
                std::min(items.size(), start + static_cast<size_t>(config.batch_size));
            std::vector<BatchItem> batch(items.begin() + static_cast<long>(start),
                                         items.begin() + static_cast<long>(stop));
            LossGraph g = compute_loss(model, datasets, batch, config.weights);
            if (!std::isfinite(g.loss.total))
                throw NumericError("finetune diverged at epoch " +
                                   std::to_string(epoch));
            if (history && step % config.log_every == 0)
                history->push_back({step, g.loss});
            opt.step(model.theta_mut(), g.tape->backward(g.total_node));
            ++step;
        }
    }
    return model;
}

Eigen::VectorXd predict_values(const Model& model,
                               const std::vector<Dataset::Labeled>& points,
                               const std::vector<double>& mu) {
    if (points.empty()) throw ConfigError("predict_values: no points");
    const int n = static_cast<int>(points.size());
    Tape tape(model.theta());
    Eigen::MatrixXd coords(2, n);
    for (int p = 0; p < n; ++p) {
        coords(0, p) = points[static_cast<size_t>(p)].x;
        coords(1, p) = points[static_cast<size_t>(p)].y;
    }
    Eigen::MatrixXd mus(std::max<Index>(static_cast<Index>(mu.size()), 1), 1);
    mus.setZero();
    for (size_t i = 0; i < mu.size(); ++i) mus(static_cast<Index>(i), 0) = mu[i];
    const int c = tape.input(std::move(coords), JetDims::plain(), n);
    const int m = tape.input(std::move(mus), JetDims::plain(), 1);
    const int u = model.forward(tape, c, m, std::vector<int>(static_cast<size_t>(n), 0));
    return tape.out(u).transpose();
}

Eigen::VectorXd truth_values(const std::vector<Dataset::Labeled>& points) {
    Eigen::VectorXd v(static_cast<Index>(points.size()));
    for (size_t i = 0; i < points.size(); ++i) v[static_cast<Index>(i)] = points[i].u;
    return v;
}

}  // namespace pinnlab
