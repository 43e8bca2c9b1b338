#pragma once

#include <filesystem>
#include <vector>

#include "pinnlab/truth.hpp"

namespace pinnlab {

struct DatasetSizes {
    int collocation = 1000;
    int initial = 256;   // CDR only, placed on the solver grid
    int boundary = 100;  // CDR: periodic pair times; Helmholtz: 400 edge points
    int test = 1000;     // Helmholtz: 100

    static DatasetSizes cdr_default() { return {1000, 256, 100, 1000}; }
    static DatasetSizes helmholtz_default() { return {1000, 0, 400, 100}; }
    static DatasetSizes defaults(PdeFamily f) {
        return f == PdeFamily::CDR ? cdr_default() : helmholtz_default();
    }
};

// Training and evaluation point sets for one PDE instance. For CDR the
// second coordinate is t; for Helmholtz it is y.
struct Dataset {
    struct Labeled {
        double x, y, u;
    };
    struct Point {
        double x, y;
    };

    PdeInstance instance;
    std::vector<Point> collocation;
    std::vector<std::pair<double, double>> initial;  // (x, u0(x)), CDR only
    double initial_time = 0.0;  // nonzero only for seq2seq window hand-off
    std::vector<double> boundary_times;              // CDR periodic pairs
    std::vector<Labeled> boundary;                   // Helmholtz Dirichlet
    std::vector<Labeled> test;
};

// Deterministic per seed. CDR requires the solution grid for test-point
// ground truth; Helmholtz uses the closed form.
Dataset sample_dataset(const PdeInstance& instance, const SolutionGrid* grid,
                       uint64_t seed, DatasetSizes sizes);
inline Dataset sample_dataset(const PdeInstance& instance, const SolutionGrid* grid,
                              uint64_t seed) {
    return sample_dataset(instance, grid, seed, DatasetSizes::defaults(instance.family));
}

// Structured-text export, one file per instance, sectioned point lists.
void save_dataset(const Dataset& d, const std::filesystem::path& path);

}  // namespace pinnlab
