#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "pinnlab/dataset.hpp"
#include "pinnlab/modsvd.hpp"
#include "pinnlab/nets.hpp"

namespace pinnlab {

struct LossWeights {
    double w1 = 1.0, w2 = 1.0, w3 = 1.0;
};

struct TrainConfig {
    LossWeights weights;
    double learning_rate = 1e-3;
    int iterations = 20000;
    int batch_size = 128;
    uint64_t seed = 0;
    int log_every = 100;
    int seq2seq_windows = 10;
    int finetune_epochs = 15;

    void validate() const;
};

struct LossBreakdown {
    double l_u = 0.0, l_f = 0.0, l_b = 0.0, total = 0.0;
};

struct LossHistoryEntry {
    int step = 0;
    LossBreakdown loss;
};
using LossHistory = std::vector<LossHistoryEntry>;

void save_loss_history(const LossHistory& h, const std::filesystem::path& path);

enum class FinetuneMode { All, Shift, Svd };
FinetuneMode finetune_mode_from_string(const std::string& s);

// A trainable model: plain weights, weights with additive decoder shifts,
// or an SVD-factorized P2INN. Exposes one flat parameter vector plus the
// segments the optimizer may update (empty list: everything trainable).
struct Model {
    enum class Kind { Plain, Shifted, Svd };

    Kind kind = Kind::Plain;
    NetworkWeights weights;          // Plain and Shifted
    std::vector<LayerSlice> shifts;  // Shifted: slices into the extended theta
    SvdFactors factors;              // Svd

    static Model plain(NetworkWeights w);
    static Model shifted(const NetworkWeights& pretrained);
    static Model svd(const NetworkWeights& pretrained);

    const NetworkSpec& spec() const;
    const Eigen::VectorXd& theta() const;
    Eigen::VectorXd& theta_mut();
    std::vector<std::pair<Index, Index>> trainable_segments() const;

    // Forward over batched coordinate jets; mu_node holds one plain column
    // per distinct instance, point_to_mu maps points onto those columns.
    int forward(Tape& tape, int coord_node, int mu_node,
                const std::vector<int>& point_to_mu) const;
    double eval(const std::vector<double>& coord, const std::vector<double>& mu) const;
};

// One (instance, role, point) reference into a dataset collection.
struct BatchItem {
    int instance = 0;
    enum Role { Collocation = 0, Initial = 1, Boundary = 2 } role = Collocation;
    int index = 0;
};

// Loss over the selected points: L_u initial mismatch, L_f mean squared
// residual, L_b periodic gap (CDR) or Dirichlet mismatch (Helmholtz).
// Roles absent from the selection contribute zero unless require_all_roles.
struct LossGraph {
    std::unique_ptr<Tape> tape;
    LossBreakdown loss;
    int total_node = -1;
};

LossGraph compute_loss(const Model& model, const std::vector<Dataset>& datasets,
                       const std::vector<BatchItem>& selection,
                       const LossWeights& weights, bool require_all_roles = false);

// Full-dataset selection (every point of every dataset).
std::vector<BatchItem> full_selection(const std::vector<Dataset>& datasets);

// Adam with conventional (beta1, beta2, eps) defaults; when segments is
// non-empty only those theta ranges are ever touched.
class AdamOptimizer {
  public:
    AdamOptimizer(Index dim, double lr,
                  std::vector<std::pair<Index, Index>> segments = {});
    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);

  private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int t_ = 0;
    Eigen::VectorXd m_, v_;
    std::vector<std::pair<Index, Index>> segments_;
};

// Mini-batch Adam over the union of all instances' point sets; mini-batches
// draw (instance, point) pairs uniformly. Aborts on non-finite loss.
LossHistory train_joint(Model& model, const std::vector<Dataset>& datasets,
                        const TrainConfig& config);

LossHistory train_per_instance(Model& model, const Dataset& dataset,
                               const TrainConfig& config);

// Time-windowed curriculum: [0, horizon] split into equal windows, each
// window's initial values supplied by the previous window's prediction on
// the solver grid. CDR only.
LossHistory train_seq2seq(Model& model, const Dataset& dataset,
                          const SolutionGrid& grid, const TrainConfig& config);

// Fine-tunes a pretrained P2INN on one instance for finetune_epochs passes
// over the full point set. Returns the adapted model.
Model finetune(const NetworkWeights& pretrained, const Dataset& dataset,
               FinetuneMode mode, const TrainConfig& config,
               LossHistory* history = nullptr);

// Batched plain-value prediction at labeled points.
Eigen::VectorXd predict_values(const Model& model,
                               const std::vector<Dataset::Labeled>& points,
                               const std::vector<double>& mu);
Eigen::VectorXd truth_values(const std::vector<Dataset::Labeled>& points);

}  // namespace pinnlab
