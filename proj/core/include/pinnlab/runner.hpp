#pragma once

#include <filesystem>
#include <optional>

#include "pinnlab/config.hpp"
#include "pinnlab/metrics.hpp"
#include "pinnlab/truth.hpp"

namespace pinnlab {

struct RunOptions {
    int workers = 1;
    std::optional<std::filesystem::path> out_override;
    std::optional<uint64_t> seed_override;  // restrict to a single seed
};

// Ground truth + dataset files only.
void run_generate(const ExperimentConfig& config, const RunOptions& opt);

// Full pipeline: ground truth, training per config, evaluation on seen and
// unseen instances, metric reports, loss histories, checkpoints, heatmaps.
// Throws NumericError after writing partial artifacts if any run diverged.
void run_experiment(const ExperimentConfig& config, const RunOptions& opt);

// Fine-tune a pretrained P2INN per the config's finetune block and report
// before/after metrics on the target instance.
void run_finetune(const ExperimentConfig& config, const RunOptions& opt);

// Re-evaluate existing checkpoints in the output directory.
void run_eval(const ExperimentConfig& config, const RunOptions& opt);

// 100 * (baseline - ours) / baseline.
double improvement_pct(double baseline, double ours);

struct ImprovementRow {
    std::string metric;
    double baseline = 0.0, ours = 0.0, improvement = 0.0;
};

// Improvement of the second report's aggregate over the first's.
std::vector<ImprovementRow> compare_runs(const std::filesystem::path& baseline,
                                         const std::filesystem::path& ours);
void save_improvement(const std::vector<ImprovementRow>& rows,
                      const std::filesystem::path& path);

// Delimited value matrix with x/t (or x/y) axis headers. The model overload
// samples nx x ny points (resolution = matrix shape); the grid overload uses
// the solver layout, i.e. nx rows by nt+1 time levels.
void export_heatmap(const SolutionGrid& grid, const std::filesystem::path& path);
void export_heatmap(const Model& model, const PdeInstance& instance, int nx, int ny,
                    const std::filesystem::path& path);

// Shared naming helpers (deterministic, config-derived paths).
std::string mu_tag(const PdeInstance& inst);
std::string instance_label(const PdeInstance& inst);

}  // namespace pinnlab
