// pinnlab: config-driven laboratory for parameter-conditioned PINNs.
//
// Verbs:
//   generate  ground-truth grids and sampled datasets
//   train     full experiment (training, evaluation, reports, heatmaps)
//   finetune  adapt a pretrained model to one instance
//   eval      re-score existing checkpoints
//   compare   improvement table between two metric reports
//   heatmap   exact (and, where checkpoints exist, predicted) field exports

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pinnlab/checkpoint.hpp"
#include "pinnlab/errors.hpp"
#include "pinnlab/runner.hpp"
#include "pinnlab/train.hpp"

namespace fs = std::filesystem;
using namespace pinnlab;

namespace {

struct CommonArgs {
    std::string config_path;
    int workers = 1;
    std::string out;
    int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config_path,
                              "experiment config (JSON)");
    if (config_required) c->required();
    cmd->add_option("--workers", args.workers, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out, "override the config's output directory");
    cmd->add_option("--seed", args.seed, "run only this seed")
        ->check(CLI::NonNegativeNumber);
}

RunOptions to_options(const CommonArgs& args) {
    RunOptions opt;
    opt.workers = args.workers;
    if (!args.out.empty()) opt.out_override = fs::path(args.out);
    if (args.seed >= 0) opt.seed_override = static_cast<uint64_t>(args.seed);
    return opt;
}

void run_heatmap_verb(const ExperimentConfig& config, const RunOptions& opt) {
    fs::path out = opt.out_override ? *opt.out_override : fs::path(config.output_dir);
    fs::create_directories(out);
    if (config.heatmaps.empty())
        throw ConfigError("config: heatmap verb needs a non-empty heatmaps list");
    const uint64_t seed0 =
        opt.seed_override ? *opt.seed_override : config.seeds.front();
    for (const auto& mu : config.heatmaps) {
        const PdeInstance inst = config.make_instance(mu);
        const std::string tag = mu_tag(inst);
        if (inst.family == PdeFamily::CDR) {
            export_heatmap(solve_cdr(inst, config.solver_nx, config.solver_nt),
                           out / ("exact_" + tag + ".tsv"));
        } else {
            std::ofstream os(out / ("exact_" + tag + ".tsv"));
            if (!os) throw IoError("heatmap: cannot open exact_" + tag + ".tsv");
            os << "x\\y";
            const int nx = config.heatmap_nx, ny = config.heatmap_nt;
            for (int k = 0; k < ny; ++k) os << '\t' << (-1.0 + 2.0 * k / (ny - 1));
            os << '\n';
            os.precision(10);
            for (int j = 0; j < nx; ++j) {
                const double x = -1.0 + 2.0 * j / (nx - 1);
                os << x;
                for (int k = 0; k < ny; ++k)
                    os << '\t'
                       << helmholtz_exact(inst.a(), x, -1.0 + 2.0 * k / (ny - 1));
                os << '\n';
            }
        }
        for (const std::string& name : config.models) {
            fs::path ckpt = out / (name + "_seed" + std::to_string(seed0) + ".ckpt");
            if (!fs::exists(ckpt))
                ckpt = out / (name + "_" + tag + "_seed" + std::to_string(seed0) +
                              ".ckpt");
            if (!fs::exists(ckpt)) continue;
            const Model model = Model::plain(load_checkpoint(ckpt));
            const bool cdr = inst.family == PdeFamily::CDR;
            export_heatmap(model, inst, cdr ? config.solver_nx : config.heatmap_nx,
                           cdr ? config.solver_nt + 1 : config.heatmap_nt,
                           out / (name + "_heatmap_" + tag + ".tsv"));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pinnlab: parameterized-PDE PINN laboratory"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, ft_args, eval_args, hm_args;
    std::string cmp_baseline, cmp_ours, cmp_out;

    add_common(app.add_subcommand("generate", "write ground truth and datasets"),
               gen_args);
    add_common(app.add_subcommand("train", "run the full experiment"), train_args);
    add_common(app.add_subcommand("finetune", "adapt a pretrained model"), ft_args);
    add_common(app.add_subcommand("eval", "re-score existing checkpoints"),
               eval_args);
    add_common(app.add_subcommand("heatmap", "export solution fields"), hm_args);

    auto* cmp = app.add_subcommand("compare", "improvement table between reports");
    cmp->add_option("baseline", cmp_baseline, "baseline metrics report")->required();
    cmp->add_option("ours", cmp_ours, "candidate metrics report")->required();
    cmp->add_option("--out", cmp_out, "also write the table to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("generate"))
            run_generate(ExperimentConfig::parse_file(gen_args.config_path),
                         to_options(gen_args));
        else if (app.got_subcommand("train"))
            run_experiment(ExperimentConfig::parse_file(train_args.config_path),
                           to_options(train_args));
        else if (app.got_subcommand("finetune"))
            run_finetune(ExperimentConfig::parse_file(ft_args.config_path),
                         to_options(ft_args));
        else if (app.got_subcommand("eval"))
            run_eval(ExperimentConfig::parse_file(eval_args.config_path),
                     to_options(eval_args));
        else if (app.got_subcommand("heatmap"))
            run_heatmap_verb(ExperimentConfig::parse_file(hm_args.config_path),
                             to_options(hm_args));
        else if (app.got_subcommand("compare")) {
            const auto rows = compare_runs(cmp_baseline, cmp_ours);
            std::printf("%-8s %14s %14s %14s\n", "metric", "baseline", "ours",
                        "improvement%");
            for (const auto& r : rows)
                std::printf("%-8s %14.6g %14.6g %14.2f\n", r.metric.c_str(),
                            r.baseline, r.ours, r.improvement);
            if (!cmp_out.empty()) save_improvement(rows, cmp_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
