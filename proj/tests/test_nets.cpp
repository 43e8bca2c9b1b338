#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pinnlab/checkpoint.hpp"
#include "pinnlab/nets.hpp"
#include "pinnlab/pdes.hpp"

using namespace pinnlab;

namespace {

std::filesystem::path temp_file(const char* stem) {
    return std::filesystem::temp_directory_path() / stem;
}

}  // namespace

TEST_CASE("parameter counts match the published table") {
    // [PAPER] PINN 10,401; PINN-P 91,651; large PINN 82,941.
    CHECK(count_params(NetworkSpec::pinn()) == 10401);
    CHECK(count_params(NetworkSpec::pinn_p(2, 3)) == 91651);
    CHECK(count_params(NetworkSpec::large_pinn()) == 82941);
    // [TRIVIAL] PINN-R shares the PINN parameterization (skips are free).
    CHECK(count_params(NetworkSpec::pinn_r()) == 10401);
}

TEST_CASE("P2INN parameter count follows from the architecture") {
    // [DERIVED] encoders: 3->150 plus 3x 150->150, (x,t)->50 plus 2x 50->50;
    // decoder: 200->50, 3x 50->50, 50->1.
    const Index p_enc = (3 * 150 + 150) + 3 * (150 * 150 + 150);
    const Index c_enc = (2 * 50 + 50) + 2 * (50 * 50 + 50);
    const Index dec = (200 * 50 + 50) + 3 * (50 * 50 + 50) + (50 * 1 + 1);
    CHECK(count_params(NetworkSpec::p2inn(2, 3)) == p_enc + c_enc + dec);
    CHECK(count_params(NetworkSpec::p2inn(2, 3)) == 91551);
}

TEST_CASE("layer table covers theta exactly once") {
    for (const NetworkSpec& spec :
         {NetworkSpec::pinn(), NetworkSpec::pinn_p(2, 3), NetworkSpec::p2inn(2, 3),
          NetworkSpec::p2inn(2, 1)}) {
        const auto table = layer_table(spec);
        Index total = 0;
        for (const auto& l : table) {
            CHECK(l.w_off == total);  // contiguous, in order
            total += l.size();
        }
        CHECK(total == count_params(spec));
    }
}

TEST_CASE("init_weights is deterministic and Glorot-bounded") {
    const NetworkSpec spec = NetworkSpec::pinn();
    const NetworkWeights a = init_weights(spec, 42);
    const NetworkWeights b = init_weights(spec, 42);
    const NetworkWeights c = init_weights(spec, 43);
    CHECK(a.theta == b.theta);
    CHECK(a.theta != c.theta);

    for (const auto& l : a.layer) {
        const double bound = std::sqrt(6.0 / (static_cast<double>(l.rows) + l.cols));
        const auto W = weight_of(a.theta, l);
        CHECK(W.cwiseAbs().maxCoeff() <= bound);
        CHECK(W.cwiseAbs().maxCoeff() > 0.25 * bound);  // not degenerate
        CHECK(bias_of(a.theta, l).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("PINN-R differs from PINN only through the identity skips") {
    const NetworkWeights w = init_weights(NetworkSpec::pinn(), 7);
    NetworkWeights wr = w;
    wr.spec = NetworkSpec::pinn_r();

    const std::vector<double> pt{1.2, 0.4};
    const double plain = eval_scalar(w, pt);
    const double skip = eval_scalar(wr, pt);
    CHECK(plain != skip);

    // [DERIVED] disabling the skips recovers the plain stack bit-for-bit.
    Tape tape(wr.theta);
    Eigen::MatrixXd in(2, 1);
    in << pt[0], pt[1];
    const int x = tape.input(in, JetDims::plain(), 1);
    const int u = forward_baseline(tape, wr, x, true, /*skips_enabled=*/false);
    CHECK(tape.value(u) == plain);
}

TEST_CASE("P2INN broadcast equals point-wise evaluation") {
    const NetworkWeights w = init_weights(NetworkSpec::p2inn(2, 3), 3);
    const std::vector<double> mu{2.0, 0.5, 1.0};
    const double a = eval_scalar(w, {0.5, 0.25}, mu);
    const double b = eval_scalar(w, {4.0, 0.75}, mu);

    Tape tape(w.theta);
    Eigen::MatrixXd coords(2, 2);
    coords << 0.5, 4.0, 0.25, 0.75;
    Eigen::MatrixXd mus(3, 1);
    mus << 2.0, 0.5, 1.0;
    const int c = tape.input(coords, JetDims::plain(), 2);
    const int m = tape.input(mus, JetDims::plain(), 1);
    const auto fwd = forward_p2inn(tape, w, c, m, {0, 0});
    CHECK(tape.out(fwd.out)(0, 0) == doctest::Approx(a).epsilon(1e-14));
    CHECK(tape.out(fwd.out)(0, 1) == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("checkpoint round trip is value-exact") {
    const NetworkWeights w = init_weights(NetworkSpec::p2inn(2, 3), 77);
    const auto path = temp_file("pinnlab_ckpt_roundtrip.ckpt");
    save_checkpoint(w, path);
    const NetworkWeights r = load_checkpoint(path);
    CHECK(r.spec == w.spec);
    CHECK(r.theta == w.theta);  // 17 significant digits round-trip doubles
    std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const NetworkWeights w = init_weights(NetworkSpec::pinn(), 0);
    const auto path = temp_file("pinnlab_ckpt_corrupt.ckpt");
    save_checkpoint(w, path);

    SUBCASE("wrong header") {
        std::ofstream os(path);
        os << "not-a-checkpoint 9\n";
        os.close();
        CHECK_THROWS_AS(load_checkpoint(path), IoError);
    }
    SUBCASE("truncated payload") {
        std::ifstream is(path);
        std::string text((std::istreambuf_iterator<char>(is)),
                         std::istreambuf_iterator<char>());
        is.close();
        std::ofstream os(path);
        os << text.substr(0, text.size() / 2);
        os.close();
        CHECK_THROWS_AS(load_checkpoint(path), IoError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("variant names round trip") {
    for (Variant v : {Variant::PINN, Variant::PINN_R, Variant::PINN_P,
                      Variant::LargePINN, Variant::P2INN})
        CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("nope"), ConfigError);
}
