#include "pinnlab/dataset.hpp"

#include <fstream>
#include <random>

namespace pinnlab {

Dataset sample_dataset(const PdeInstance& instance, const SolutionGrid* grid,
                       uint64_t seed, DatasetSizes sizes) {
    Dataset d;
    d.instance = instance;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (instance.family == PdeFamily::CDR) {
        if (!grid) throw ConfigError("sample_dataset: CDR needs a solution grid");
        const double T = instance.horizon;
        for (int i = 0; i < sizes.collocation; ++i)
            d.collocation.push_back({unit(rng) * kTwoPi, unit(rng) * T});
        const int nx = grid->nx;
        for (int i = 0; i < sizes.initial; ++i) {
            const int j = i * nx / sizes.initial;
            d.initial.emplace_back(grid->x(j), grid->values(j, 0));
        }
        for (int i = 0; i < sizes.boundary; ++i)
            d.boundary_times.push_back(unit(rng) * T);
        for (int i = 0; i < sizes.test; ++i) {
            const double x = unit(rng) * kTwoPi;
            const double t = unit(rng) * T;
            d.test.push_back({x, t, grid->interpolate(x, t)});
        }
    } else {
        const double a = instance.a();
        auto coord = [&] { return -1.0 + 2.0 * unit(rng); };
        for (int i = 0; i < sizes.collocation; ++i)
            d.collocation.push_back({coord(), coord()});
        // boundary: even split over the four edges of [-1,1]^2
        const int per_edge = sizes.boundary / 4;
        for (int e = 0; e < 4; ++e) {
            const int n = e == 3 ? sizes.boundary - 3 * per_edge : per_edge;
            for (int i = 0; i < n; ++i) {
                const double s = coord();
                double x = 0, y = 0;
                switch (e) {
                    case 0: x = -1.0; y = s; break;
                    case 1: x = 1.0; y = s; break;
                    case 2: x = s; y = -1.0; break;
                    case 3: x = s; y = 1.0; break;
                }
                d.boundary.push_back({x, y, helmholtz_exact(a, x, y)});
            }
        }
        for (int i = 0; i < sizes.test; ++i) {
            const double x = coord(), y = coord();
            d.test.push_back({x, y, helmholtz_exact(a, x, y)});
        }
    }
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_dataset: cannot open " + path.string());
    os.precision(17);
    const bool cdr = d.instance.family == PdeFamily::CDR;
    os << "pinnlab-dataset 1\n";
    os << "family " << to_string(d.instance.family) << "\n";
    os << "mu";
    for (double m : d.instance.mu_vector()) os << " " << m;
    os << "\n";
    if (cdr) os << "ic " << to_string(d.instance.ic) << "\n";

    os << "section collocation " << d.collocation.size() << "\n";
    os << (cdr ? "# x t\n" : "# x y\n");
    for (const auto& p : d.collocation) os << p.x << " " << p.y << "\n";

    if (cdr) {
        os << "section initial " << d.initial.size() << "\n# x u\n";
        for (const auto& [x, u] : d.initial) os << x << " " << u << "\n";
        os << "section boundary " << d.boundary_times.size() << "\n# t\n";
        for (double t : d.boundary_times) os << t << "\n";
    } else {
        os << "section boundary " << d.boundary.size() << "\n# x y u\n";
        for (const auto& p : d.boundary) os << p.x << " " << p.y << " " << p.u << "\n";
    }

    os << "section test " << d.test.size() << "\n";
    os << (cdr ? "# x t u\n" : "# x y u\n");
    for (const auto& p : d.test) os << p.x << " " << p.y << " " << p.u << "\n";
    os << "end\n";
    if (!os) throw IoError("save_dataset: write failure " + path.string());
}

}  // namespace pinnlab
