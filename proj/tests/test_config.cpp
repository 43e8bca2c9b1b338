#include <doctest.h>

#include <filesystem>

#include "pinnlab/config.hpp"

using namespace pinnlab;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "family": "cdr",
  "cdr_class": "reaction",
  "models": ["p2inn"]
})";

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
    const ExperimentConfig c = ExperimentConfig::parse_json(kMinimal, "mem");
    CHECK(c.family == PdeFamily::CDR);
    CHECK(c.mask.name() == "reaction");
    CHECK(c.coeff_min == 1.0);
    CHECK(c.coeff_max == 5.0);
    CHECK(c.seeds == std::vector<uint64_t>{0, 1, 2});
    CHECK(c.train.iterations == 20000);
    CHECK(c.train.learning_rate == doctest::Approx(1e-3));
    CHECK(c.train.batch_size == 128);
    CHECK(c.train.weights.w1 == 1.0);
    CHECK(c.solver_nx == 256);
    CHECK(c.solver_nt == 100);
    CHECK(c.training_instances().size() == 5);
}

TEST_CASE("unknown keys are rejected with an anchored message") {
    const char* bad = R"({
      "schema_version": 1,
      "family": "cdr",
      "cdr_class": "reaction",
      "models": ["p2inn"],
      "bogus_knob": 3
    })";
    try {
        ExperimentConfig::parse_json(bad, "exp.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("exp.json") != std::string::npos);
        CHECK(msg.find("bogus_knob") != std::string::npos);
    }
}

TEST_CASE("schema version and structural errors") {
    CHECK_THROWS_AS(ExperimentConfig::parse_json(R"({"family": "cdr"})"),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_json(
                        R"({"schema_version": 99, "family": "cdr",
                            "cdr_class": "reaction", "models": ["p2inn"]})"),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_json("{not json"), ConfigError);
    // Helmholtz must not carry CDR-only keys.
    CHECK_THROWS_AS(ExperimentConfig::parse_json(
                        R"({"schema_version": 1, "family": "helmholtz",
                            "cdr_class": "reaction", "models": ["p2inn"]})"),
                    ConfigError);
    // Unknown model name.
    CHECK_THROWS_AS(ExperimentConfig::parse_json(
                        R"({"schema_version": 1, "family": "cdr",
                            "cdr_class": "reaction", "models": ["mlp"]})"),
                    ConfigError);
    // loss_weights arity.
    CHECK_THROWS_AS(ExperimentConfig::parse_json(
                        R"({"schema_version": 1, "family": "cdr",
                            "cdr_class": "reaction", "models": ["p2inn"],
                            "train": {"loss_weights": [1, 2]}})"),
                    ConfigError);
}

TEST_CASE("nested sections override defaults") {
    const char* text = R"({
      "schema_version": 1,
      "name": "demo",
      "family": "cdr",
      "cdr_class": "convection",
      "initial_condition": "one_plus_sin",
      "coeff_min": 30, "coeff_max": 30, "coeff_step": 1,
      "models": ["pinn", "pinn_seq2seq"],
      "seeds": [4],
      "train": {"iterations": 500, "batch_size": 64, "loss_weights": [1, 2, 3]},
      "solver": {"nx": 128, "nt": 50},
      "eval_unseen": [[31, 0, 0]],
      "heatmaps": [[30, 0, 0]],
      "finetune": {"mode": "shift", "epochs": 5, "mu": [30, 0, 0]},
      "output_dir": "out/demo"
    })";
    const ExperimentConfig c = ExperimentConfig::parse_json(text, "mem");
    CHECK(c.name == "demo");
    CHECK(c.ic == IcKind::OnePlusSin);
    CHECK(c.training_instances().size() == 1);
    CHECK(c.training_instances()[0].beta() == 30.0);
    CHECK(c.train.iterations == 500);
    CHECK(c.train.weights.w3 == 3.0);
    CHECK(c.solver_nx == 128);
    CHECK(c.eval_unseen.size() == 1);
    CHECK(c.finetune.present);
    CHECK(c.finetune.mode == FinetuneMode::Shift);
    CHECK(c.train.finetune_epochs == 5);
    CHECK(c.output_dir == "out/demo");
}

TEST_CASE("helmholtz configs enumerate the a-range") {
    const char* text = R"({
      "schema_version": 1,
      "family": "helmholtz",
      "coeff_min": 2.5, "coeff_max": 3.0, "coeff_step": 0.1,
      "models": ["p2inn"]
    })";
    const ExperimentConfig c = ExperimentConfig::parse_json(text, "mem");
    const auto insts = c.training_instances();
    REQUIRE(insts.size() == 6);
    CHECK(insts[0].family == PdeFamily::Helmholtz);
    CHECK(insts[5].a() == doctest::Approx(3.0));
}

TEST_CASE("all shipped presets parse and validate") {
    const std::filesystem::path dir = PINNLAB_PRESET_DIR;
    size_t count = 0;
    bool saw_reaction = false, saw_beta30 = false;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        ++count;
        const ExperimentConfig c = ExperimentConfig::parse_file(entry.path());
        CHECK_FALSE(c.models.empty());
        saw_reaction |= entry.path().filename() == "reaction_1to5_p2inn.json";
        saw_beta30 |= entry.path().filename() == "convection_beta30_failure.json";
    }
    CHECK(count >= 5);
    CHECK(saw_reaction);
    CHECK(saw_beta30);
}
