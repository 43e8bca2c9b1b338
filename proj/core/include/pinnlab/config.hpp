#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "pinnlab/pdes.hpp"
#include "pinnlab/train.hpp"

namespace pinnlab {

// Parsed experiment description. The on-disk format is JSON with a
// schema_version field; unknown keys are rejected.
struct ExperimentConfig {
    static constexpr int kSchemaVersion = 1;

    std::string name;
    PdeFamily family = PdeFamily::CDR;
    CoefficientMask mask;  // CDR coefficient class
    IcKind ic = IcKind::GaussPi2;
    double coeff_min = 1.0, coeff_max = 5.0, coeff_step = 1.0;

    // model names: p2inn, pinn_p, pinn, pinn_r, large_pinn, pinn_seq2seq
    std::vector<std::string> models;
    std::vector<uint64_t> seeds{0, 1, 2};
    TrainConfig train;

    int collocation_points = -1;  // <0: per-family defaults
    int test_points = -1;
    int solver_nx = 256, solver_nt = 100;
    int hidden_p = 150;

    std::vector<std::array<double, 3>> eval_unseen;
    std::vector<std::array<double, 3>> baseline_instances;  // default: full range
    std::vector<std::array<double, 3>> heatmaps;
    int heatmap_nx = 128, heatmap_nt = 100;

    struct Finetune {
        bool present = false;
        FinetuneMode mode = FinetuneMode::Svd;
        std::array<double, 3> mu{};
        std::string pretrained;  // optional checkpoint path; empty: train here
    };
    Finetune finetune;

    std::string output_dir = "out";

    void validate() const;
    std::vector<PdeInstance> training_instances() const;
    PdeInstance make_instance(const std::array<double, 3>& mu) const;

    static ExperimentConfig parse_file(const std::filesystem::path& path);
    static ExperimentConfig parse_json(const std::string& text,
                                       const std::string& origin = "<string>");
};

}  // namespace pinnlab
