#include "pinnlab/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "pinnlab/checkpoint.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/errors.hpp"
#include "pinnlab/train.hpp"

namespace pinnlab {

namespace {

namespace fs = std::filesystem;

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// File-name safe: 2.5 -> 2p5, -1 -> m1.
std::string fmt_tag(double v) {
    std::string s = fmt_g(v);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
    }
    return s;
}

struct RunPlan {
    fs::path out;
    std::vector<uint64_t> seeds;
    std::vector<PdeInstance> instances;  // training set
    DatasetSizes sizes;
};

RunPlan make_plan(const ExperimentConfig& config, const RunOptions& opt) {
    RunPlan plan;
    plan.out = opt.out_override ? *opt.out_override : fs::path(config.output_dir);
    plan.seeds = config.seeds;
    if (opt.seed_override) plan.seeds = {*opt.seed_override};
    plan.instances = config.training_instances();
    plan.sizes = DatasetSizes::defaults(config.family);
    if (config.collocation_points >= 0) plan.sizes.collocation = config.collocation_points;
    if (config.test_points >= 0) plan.sizes.test = config.test_points;
    fs::create_directories(plan.out);
    return plan;
}

std::string range_label(const ExperimentConfig& config) {
    return fmt_g(config.coeff_min) + "~" + fmt_g(config.coeff_max);
}

// Ground-truth grids, computed once per distinct instance (CDR only).
class GridCache {
  public:
    GridCache(int nx, int nt) : nx_(nx), nt_(nt) {}

    const SolutionGrid* get(const PdeInstance& inst) {
        if (inst.family != PdeFamily::CDR) return nullptr;
        const std::string key = mu_tag(inst);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = grids_.find(key);
        if (it == grids_.end())
            it = grids_.emplace(key, std::make_unique<SolutionGrid>(
                                         solve_cdr(inst, nx_, nt_)))
                     .first;
        return it->second.get();
    }

  private:
    int nx_, nt_;
    std::mutex mu_;
    std::map<std::string, std::unique_ptr<SolutionGrid>> grids_;
};

// Dataset sampling depends on the instance only, not the model seed, so
// every model and seed is scored on the same test points.
uint64_t dataset_seed(const PdeInstance& inst) {
    uint64_t h = 0x5eedd5ee'd5eed5eeULL;
    for (double v : inst.mu) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h = (h ^ bits) * 0x9e3779b97f4a7c15ULL;
    }
    return h ^ static_cast<uint64_t>(inst.ic);
}

NetworkSpec spec_for(const std::string& name, const ExperimentConfig& config) {
    const int mu_dim = config.family == PdeFamily::CDR ? 3 : 1;
    if (name == "p2inn") {
        NetworkSpec s = NetworkSpec::p2inn(2, mu_dim);
        s.hidden_p = config.hidden_p;
        return s;
    }
    if (name == "pinn_p") return NetworkSpec::pinn_p(2, mu_dim);
    if (name == "pinn" || name == "pinn_seq2seq") return NetworkSpec::pinn();
    if (name == "pinn_r") return NetworkSpec::pinn_r();
    if (name == "large_pinn") return NetworkSpec::large_pinn();
    throw ConfigError("unknown model '" + name + "'");
}

bool is_joint(const std::string& name) { return name == "p2inn" || name == "pinn_p"; }

fs::path joint_ckpt(const fs::path& out, const std::string& model, uint64_t seed) {
    return out / (model + "_seed" + std::to_string(seed) + ".ckpt");
}
fs::path solo_ckpt(const fs::path& out, const std::string& model,
                   const PdeInstance& inst, uint64_t seed) {
    return out / (model + "_" + mu_tag(inst) + "_seed" + std::to_string(seed) +
                  ".ckpt");
}

MetricsRow eval_row(const Model& model, const Dataset& data,
                    const std::string& range, uint64_t seed, bool pass_mu) {
    const std::vector<double> mu =
        pass_mu ? data.instance.mu_vector() : std::vector<double>{};
    const Eigen::VectorXd pred = predict_values(model, data.test, mu);
    const Eigen::VectorXd truth = truth_values(data.test);
    const L2Errors l2 = l2_errors(pred, truth);
    const ExplainedVariance ev = explained_variance(pred, truth);
    MetricsRow row;
    row.family = to_string(data.instance.family);
    row.range = range;
    row.instance_id = instance_label(data.instance);
    row.seed = seed;
    row.abs = l2.abs;
    row.rel = l2.rel_defined ? l2.rel : std::numeric_limits<double>::quiet_NaN();
    row.max = max_error(pred, truth);
    row.exp_var = ev.defined ? ev.value : std::numeric_limits<double>::quiet_NaN();
    return row;
}

// Runs jobs on `workers` threads; each job owns its output slots.
void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
    if (workers <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
            jobs[i]();
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// nx rows by ny columns. CDR rows sample x = 2pi j / nx (periodic, solver
// layout); other axes are inclusive linspaces, so a CDR grid exported with
// ny = nt + 1 reproduces the solver time levels exactly.
void write_heatmap(const PdeInstance& instance, int nx, int ny,
                   const std::function<double(double, double)>& f,
                   const fs::path& path) {
    if (nx < 2 || ny < 2) throw ConfigError("heatmap: resolution must be >= 2x2");
    std::ofstream os(path);
    if (!os) throw IoError("heatmap: cannot open " + path.string());
    const bool cdr = instance.family == PdeFamily::CDR;
    auto col = [&](int k) {
        return cdr ? instance.horizon * k / (ny - 1) : -1.0 + 2.0 * k / (ny - 1);
    };
    auto row = [&](int j) {
        return cdr ? kTwoPi * j / nx : -1.0 + 2.0 * j / (nx - 1);
    };
    os << "x\\" << (cdr ? 't' : 'y');
    for (int k = 0; k < ny; ++k) os << '\t' << fmt_g(col(k));
    os << '\n';
    os.precision(10);
    for (int j = 0; j < nx; ++j) {
        os << fmt_g(row(j));
        for (int k = 0; k < ny; ++k) os << '\t' << f(row(j), col(k));
        os << '\n';
    }
    if (!os) throw IoError("heatmap: write failed for " + path.string());
}

}  // namespace

std::string mu_tag(const PdeInstance& inst) {
    if (inst.family == PdeFamily::CDR)
        return "b" + fmt_tag(inst.beta()) + "_n" + fmt_tag(inst.nu()) + "_r" +
               fmt_tag(inst.rho());
    return "a" + fmt_tag(inst.a());
}

std::string instance_label(const PdeInstance& inst) {
    if (inst.family == PdeFamily::CDR)
        return "beta=" + fmt_g(inst.beta()) + ",nu=" + fmt_g(inst.nu()) +
               ",rho=" + fmt_g(inst.rho());
    return "a=" + fmt_g(inst.a());
}

double improvement_pct(double baseline, double ours) {
    if (baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 100.0 * (baseline - ours) / baseline;
}

void export_heatmap(const SolutionGrid& grid, const fs::path& path) {
    write_heatmap(grid.instance, grid.nx, grid.nt + 1,
                  [&](double x, double t) { return grid.interpolate(x, t); }, path);
}

void export_heatmap(const Model& model, const PdeInstance& instance, int nx, int ny,
                    const fs::path& path) {
    const bool pass_mu = model.spec().mu_dim > 0;
    const std::vector<double> mu =
        pass_mu ? instance.mu_vector() : std::vector<double>{};
    write_heatmap(instance, nx, ny,
                  [&](double x, double c) { return model.eval({x, c}, mu); }, path);
}

void run_generate(const ExperimentConfig& config, const RunOptions& opt) {
    const RunPlan plan = make_plan(config, opt);
    GridCache grids(config.solver_nx, config.solver_nt);
    for (const auto& inst : plan.instances) {
        const SolutionGrid* grid = grids.get(inst);
        if (grid) export_heatmap(*grid, plan.out / ("exact_" + mu_tag(inst) + ".tsv"));
        const Dataset data = sample_dataset(inst, grid, dataset_seed(inst), plan.sizes);
        save_dataset(data, plan.out / ("dataset_" + mu_tag(inst) + ".txt"));
    }
}

void run_experiment(const ExperimentConfig& config, const RunOptions& opt) {
    const RunPlan plan = make_plan(config, opt);
    GridCache grids(config.solver_nx, config.solver_nt);
    const std::string range = range_label(config);

    // Shared datasets for the training instances and unseen evaluation set.
    std::vector<Dataset> datasets;
    datasets.reserve(plan.instances.size());
    for (const auto& inst : plan.instances)
        datasets.push_back(sample_dataset(inst, grids.get(inst), dataset_seed(inst),
                                          plan.sizes));
    std::vector<Dataset> unseen;
    for (const auto& mu : config.eval_unseen) {
        const PdeInstance inst = config.make_instance(mu);
        unseen.push_back(
            sample_dataset(inst, grids.get(inst), dataset_seed(inst), plan.sizes));
    }

    std::vector<std::string> failures;
    std::mutex failures_mu;
    auto guard = [&](const std::string& what, const std::function<void()>& body) {
        return [&, what, body] {
            try {
                body();
            } catch (const NumericError& e) {
                std::lock_guard<std::mutex> lock(failures_mu);
                failures.push_back(what + ": " + e.what());
            }
        };
    };

    for (const std::string& name : config.models) {
        const NetworkSpec spec = spec_for(name, config);
        const bool joint = is_joint(name);
        MetricsReport report;
        std::vector<std::function<void()>> jobs;

        if (joint) {
            report.rows.resize(plan.seeds.size() *
                               (plan.instances.size() + unseen.size()));
            for (size_t si = 0; si < plan.seeds.size(); ++si) {
                const uint64_t seed = plan.seeds[si];
                MetricsRow* rows =
                    report.rows.data() +
                    si * (plan.instances.size() + unseen.size());
                jobs.push_back(guard(name + " seed " + std::to_string(seed), [&,
                                                                              seed,
                                                                              rows] {
                    Model model = Model::plain(init_weights(spec, seed));
                    TrainConfig tc = config.train;
                    tc.seed = seed;
                    const LossHistory hist = train_joint(model, datasets, tc);
                    const std::string stem = name + "_seed" + std::to_string(seed);
                    save_checkpoint(model.weights, joint_ckpt(plan.out, name, seed));
                    save_loss_history(hist, plan.out / (stem + "_loss.tsv"));
                    for (size_t i = 0; i < datasets.size(); ++i)
                        rows[i] = eval_row(model, datasets[i], range, seed, true);
                    for (size_t i = 0; i < unseen.size(); ++i)
                        rows[datasets.size() + i] =
                            eval_row(model, unseen[i], "unseen", seed, true);
                }));
            }
        } else {
            std::vector<const Dataset*> targets;
            std::vector<Dataset> extra;
            if (config.baseline_instances.empty()) {
                for (const auto& d : datasets) targets.push_back(&d);
            } else {
                extra.reserve(config.baseline_instances.size());
                for (const auto& mu : config.baseline_instances) {
                    const PdeInstance inst = config.make_instance(mu);
                    extra.push_back(sample_dataset(inst, grids.get(inst),
                                                   dataset_seed(inst), plan.sizes));
                }
                for (const auto& d : extra) targets.push_back(&d);
            }
            report.rows.resize(plan.seeds.size() * targets.size());
            for (size_t si = 0; si < plan.seeds.size(); ++si) {
                for (size_t ti = 0; ti < targets.size(); ++ti) {
                    const uint64_t seed = plan.seeds[si];
                    const Dataset* data = targets[ti];
                    MetricsRow* row = &report.rows[si * targets.size() + ti];
                    jobs.push_back(guard(
                        name + " " + mu_tag(data->instance) + " seed " +
                            std::to_string(seed),
                        [&, seed, data, row] {
                            Model model = Model::plain(init_weights(spec, seed));
                            TrainConfig tc = config.train;
                            tc.seed = seed;
                            LossHistory hist;
                            if (name == "pinn_seq2seq")
                                hist = train_seq2seq(model, *data,
                                                     *grids.get(data->instance), tc);
                            else
                                hist = train_per_instance(model, *data, tc);
                            const fs::path ckpt =
                                solo_ckpt(plan.out, name, data->instance, seed);
                            save_checkpoint(model.weights, ckpt);
                            fs::path loss_path = ckpt;
                            loss_path.replace_extension();
                            loss_path += "_loss.tsv";
                            save_loss_history(hist, loss_path);
                            *row = eval_row(model, *data, range, seed, false);
                        }));
                }
            }
        }

        run_jobs(jobs, opt.workers);
        save_report(report, plan.out / (name + "_metrics.tsv"));
    }

    // Heatmaps: exact grid plus a prediction per trained model (seed 0 run)
    // on the same grid points.
    for (const auto& mu : config.heatmaps) {
        const PdeInstance inst = config.make_instance(mu);
        const std::string tag = mu_tag(inst);
        const int hnx = config.heatmap_nx, hnt = config.heatmap_nt;
        if (inst.family == PdeFamily::CDR) {
            export_heatmap(solve_cdr(inst, config.solver_nx, config.solver_nt),
                           plan.out / ("exact_" + tag + ".tsv"));
        } else {
            write_heatmap(inst, hnx, hnt,
                          [&](double x, double y) {
                              return helmholtz_exact(inst.a(), x, y);
                          },
                          plan.out / ("exact_" + tag + ".tsv"));
        }
        const uint64_t seed0 = plan.seeds.front();
        for (const std::string& name : config.models) {
            fs::path ckpt = is_joint(name) ? joint_ckpt(plan.out, name, seed0)
                                           : solo_ckpt(plan.out, name, inst, seed0);
            if (!fs::exists(ckpt)) continue;
            const Model model = Model::plain(load_checkpoint(ckpt));
            const int nx = inst.family == PdeFamily::CDR ? config.solver_nx : hnx;
            const int ny =
                inst.family == PdeFamily::CDR ? config.solver_nt + 1 : hnt;
            export_heatmap(model, inst, nx, ny,
                           plan.out / (name + "_heatmap_" + tag + ".tsv"));
        }
    }

    if (!failures.empty()) {
        std::string msg = "training diverged in " +
                          std::to_string(failures.size()) + " run(s):";
        for (const auto& f : failures) msg += "\n  " + f;
        throw NumericError(msg);
    }
}

void run_finetune(const ExperimentConfig& config, const RunOptions& opt) {
    if (!config.finetune.present)
        throw ConfigError("config: finetune verb needs a finetune block");
    const RunPlan plan = make_plan(config, opt);
    GridCache grids(config.solver_nx, config.solver_nt);

    fs::path pretrained_path = config.finetune.pretrained.empty()
                                   ? joint_ckpt(plan.out, "p2inn", plan.seeds.front())
                                   : fs::path(config.finetune.pretrained);
    const NetworkWeights pretrained = load_checkpoint(pretrained_path);
    if (!pretrained.spec.is_p2inn())
        throw ConfigError("finetune: pretrained checkpoint is not a P2INN");

    const PdeInstance inst = config.make_instance(config.finetune.mu);
    const Dataset data =
        sample_dataset(inst, grids.get(inst), dataset_seed(inst), plan.sizes);

    TrainConfig tc = config.train;
    tc.seed = plan.seeds.front();

    const Model before = Model::plain(pretrained);
    LossHistory hist;
    const Model after = finetune(pretrained, data, config.finetune.mode, tc, &hist);

    MetricsReport report;
    report.rows.push_back(eval_row(before, data, "before", tc.seed, true));
    report.rows.push_back(eval_row(after, data, "after", tc.seed, true));
    save_report(report, plan.out / "finetune_metrics.tsv");
    save_loss_history(hist, plan.out / "finetune_loss.tsv");

    std::vector<ImprovementRow> imp{
        {"abs", report.rows[0].abs, report.rows[1].abs,
         improvement_pct(report.rows[0].abs, report.rows[1].abs)},
        {"rel", report.rows[0].rel, report.rows[1].rel,
         improvement_pct(report.rows[0].rel, report.rows[1].rel)}};
    save_improvement(imp, plan.out / "finetune_improvement.tsv");

    if (after.kind == Model::Kind::Svd)
        save_factors(after.factors, plan.out / "finetuned.factors");
    else
        save_checkpoint(after.weights, plan.out / "finetuned.ckpt");
}

void run_eval(const ExperimentConfig& config, const RunOptions& opt) {
    const RunPlan plan = make_plan(config, opt);
    GridCache grids(config.solver_nx, config.solver_nt);
    const std::string range = range_label(config);

    std::vector<Dataset> datasets;
    for (const auto& inst : plan.instances)
        datasets.push_back(
            sample_dataset(inst, grids.get(inst), dataset_seed(inst), plan.sizes));

    for (const std::string& name : config.models) {
        MetricsReport report;
        for (uint64_t seed : plan.seeds) {
            if (is_joint(name)) {
                const Model model =
                    Model::plain(load_checkpoint(joint_ckpt(plan.out, name, seed)));
                for (const auto& d : datasets)
                    report.rows.push_back(eval_row(model, d, range, seed, true));
            } else {
                for (const auto& d : datasets) {
                    const fs::path ckpt =
                        solo_ckpt(plan.out, name, d.instance, seed);
                    if (!fs::exists(ckpt)) continue;
                    const Model model = Model::plain(load_checkpoint(ckpt));
                    report.rows.push_back(eval_row(model, d, range, seed, false));
                }
            }
        }
        if (report.rows.empty())
            throw IoError("eval: no checkpoints found for model '" + name + "' in " +
                          plan.out.string());
        save_report(report, plan.out / (name + "_metrics.tsv"));
    }
}

std::vector<ImprovementRow> compare_runs(const fs::path& baseline,
                                         const fs::path& ours) {
    const MetricsRow base = load_report(baseline).aggregate_mean();
    const MetricsRow our = load_report(ours).aggregate_mean();
    return {{"abs", base.abs, our.abs, improvement_pct(base.abs, our.abs)},
            {"rel", base.rel, our.rel, improvement_pct(base.rel, our.rel)},
            {"max", base.max, our.max, improvement_pct(base.max, our.max)}};
}

void save_improvement(const std::vector<ImprovementRow>& rows, const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("improvement: cannot open " + path.string());
    os << "metric\tbaseline\tours\timprovement_pct\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.metric << '\t' << r.baseline << '\t' << r.ours << '\t'
           << r.improvement << '\n';
    if (!os) throw IoError("improvement: write failed for " + path.string());
}

}  // namespace pinnlab
