#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pinnlab {

struct L2Errors {
    double abs = 0.0;  // RMS: ||pred - truth||_2 / sqrt(n)
    double rel = 0.0;  // ||pred - truth||_2 / ||truth||_2
    bool rel_defined = true;
};

L2Errors l2_errors(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
double max_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// 1 - Var(truth - pred) / Var(truth), population variances.
struct ExplainedVariance {
    double value = 0.0;
    bool defined = true;
};
ExplainedVariance explained_variance(const Eigen::VectorXd& pred,
                                     const Eigen::VectorXd& truth);

struct MetricsRow {
    std::string family;
    std::string range;
    std::string instance_id;
    uint64_t seed = 0;
    double abs = 0.0, rel = 0.0, max = 0.0, exp_var = 0.0;
};

// Per-instance rows plus mean/stddev aggregates over instances and seeds.
struct MetricsReport {
    std::vector<MetricsRow> rows;

    MetricsRow aggregate_mean() const;
    MetricsRow aggregate_std() const;  // population std over rows
};

// Delimited text: header, one row per (instance, seed), aggregate rows.
void save_report(const MetricsReport& r, const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

}  // namespace pinnlab
