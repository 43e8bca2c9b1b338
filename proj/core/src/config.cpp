#include "pinnlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pinnlab {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

std::array<double, 3> mu_triple(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() > 3 || j.empty())
        throw ConfigError(where + ": mu must be an array of 1..3 numbers");
    std::array<double, 3> mu{0.0, 0.0, 0.0};
    for (size_t i = 0; i < j.size(); ++i) mu[i] = j[i].get<double>();
    return mu;
}

}  // namespace

void ExperimentConfig::validate() const {
    train.validate();
    if (models.empty()) throw ConfigError("config: no models requested");
    static const std::set<std::string> known{"p2inn",      "pinn_p", "pinn",
                                             "pinn_r",     "large_pinn",
                                             "pinn_seq2seq"};
    for (const auto& m : models)
        if (!known.count(m)) throw ConfigError("config: unknown model '" + m + "'");
    if (seeds.empty()) throw ConfigError("config: empty seed list");
    if (coeff_step <= 0 || coeff_max < coeff_min)
        throw ConfigError("config: bad coefficient range");
    if (family == PdeFamily::CDR && mask.active() == 0)
        throw ConfigError("config: CDR requires an active coefficient class");
    if (solver_nx <= 0 || (solver_nx & (solver_nx - 1)) != 0)
        throw ConfigError("config: solver nx must be a power of two");
    if (solver_nt <= 0) throw ConfigError("config: solver nt must be positive");
    if (output_dir.empty()) throw ConfigError("config: empty output_dir");
}

PdeInstance ExperimentConfig::make_instance(const std::array<double, 3>& mu) const {
    if (family == PdeFamily::CDR) return PdeInstance::cdr(mu[0], mu[1], mu[2], ic);
    return PdeInstance::helmholtz(mu[0]);
}

std::vector<PdeInstance> ExperimentConfig::training_instances() const {
    if (family == PdeFamily::CDR)
        return enumerate_instances(mask, coeff_min, coeff_max, coeff_step, ic);
    return enumerate_helmholtz(coeff_min, coeff_max, coeff_step);
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_json(ss.str(), path.string());
}

ExperimentConfig ExperimentConfig::parse_json(const std::string& text,
                                              const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": JSON parse error: " + e.what());
    }
    const std::string where = origin;
    try {
        reject_unknown_keys(
            j,
            {"schema_version", "name", "family", "cdr_class", "initial_condition",
             "coeff_min", "coeff_max", "coeff_step", "models", "seeds", "train",
             "collocation_points", "test_points", "solver", "hidden_p",
             "eval_unseen", "baseline_instances", "heatmaps", "heatmap_resolution",
             "finetune", "output_dir"},
            where);

        if (!j.contains("schema_version"))
            throw ConfigError(where + ": missing schema_version");
        if (j["schema_version"].get<int>() != kSchemaVersion)
            throw ConfigError(where + ": unsupported schema_version");

        ExperimentConfig c;
        c.name = j.value("name", std::string("experiment"));
        c.family = family_from_string(j.value("family", std::string("cdr")));
        if (c.family == PdeFamily::CDR) {
            if (!j.contains("cdr_class"))
                throw ConfigError(where + ": CDR config needs cdr_class");
            c.mask = CoefficientMask::from_name(j["cdr_class"].get<std::string>());
            c.ic = ic_from_string(
                j.value("initial_condition", std::string("gauss_pi_2")));
        } else if (j.contains("cdr_class") || j.contains("initial_condition")) {
            throw ConfigError(where + ": cdr_class/initial_condition are CDR-only");
        }
        c.coeff_min = j.value("coeff_min", 1.0);
        c.coeff_max = j.value("coeff_max", 5.0);
        c.coeff_step = j.value("coeff_step", 1.0);
        if (!j.contains("models"))
            throw ConfigError(where + ": missing models list");
        c.models = j["models"].get<std::vector<std::string>>();
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();

        if (j.contains("train")) {
            const json& t = j["train"];
            reject_unknown_keys(t,
                                {"iterations", "learning_rate", "batch_size",
                                 "loss_weights", "log_every", "seq2seq_windows",
                                 "finetune_epochs"},
                                where + ".train");
            c.train.iterations = t.value("iterations", c.train.iterations);
            c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
            c.train.batch_size = t.value("batch_size", c.train.batch_size);
            c.train.log_every = t.value("log_every", c.train.log_every);
            c.train.seq2seq_windows =
                t.value("seq2seq_windows", c.train.seq2seq_windows);
            c.train.finetune_epochs =
                t.value("finetune_epochs", c.train.finetune_epochs);
            if (t.contains("loss_weights")) {
                const auto w = t["loss_weights"].get<std::vector<double>>();
                if (w.size() != 3)
                    throw ConfigError(where + ": loss_weights must have 3 entries");
                c.train.weights = {w[0], w[1], w[2]};
            }
        }

        c.collocation_points = j.value("collocation_points", -1);
        c.test_points = j.value("test_points", -1);
        if (j.contains("solver")) {
            const json& s = j["solver"];
            reject_unknown_keys(s, {"nx", "nt"}, where + ".solver");
            c.solver_nx = s.value("nx", c.solver_nx);
            c.solver_nt = s.value("nt", c.solver_nt);
        }
        c.hidden_p = j.value("hidden_p", 150);

        for (const char* key : {"eval_unseen", "baseline_instances", "heatmaps"}) {
            if (!j.contains(key)) continue;
            auto* dst = key == std::string("eval_unseen") ? &c.eval_unseen
                        : key == std::string("baseline_instances")
                            ? &c.baseline_instances
                            : &c.heatmaps;
            for (const auto& e : j[key]) dst->push_back(mu_triple(e, where));
        }
        if (j.contains("heatmap_resolution")) {
            const auto r = j["heatmap_resolution"].get<std::vector<int>>();
            if (r.size() != 2)
                throw ConfigError(where + ": heatmap_resolution must be [nx, nt]");
            c.heatmap_nx = r[0];
            c.heatmap_nt = r[1];
        }

        if (j.contains("finetune")) {
            const json& f = j["finetune"];
            reject_unknown_keys(f, {"mode", "epochs", "mu", "pretrained"},
                                where + ".finetune");
            c.finetune.present = true;
            c.finetune.mode =
                finetune_mode_from_string(f.value("mode", std::string("svd")));
            c.train.finetune_epochs = f.value("epochs", c.train.finetune_epochs);
            if (!f.contains("mu"))
                throw ConfigError(where + ": finetune needs a target mu");
            c.finetune.mu = mu_triple(f["mu"], where + ".finetune");
            c.finetune.pretrained = f.value("pretrained", std::string());
        }

        c.output_dir = j.value("output_dir", std::string("out/") + c.name);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace pinnlab
