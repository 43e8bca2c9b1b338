#include <random>

#include <benchmark/benchmark.h>

#include "pinnlab/modsvd.hpp"
#include "pinnlab/train.hpp"
#include "pinnlab/truth.hpp"

using namespace pinnlab;

namespace {

// Coordinate jets for `n` CDR points: per-point block (value, d/dx, d/dt, d2/dx2).
Eigen::MatrixXd make_coords(int n) {
    const int C = JetDims::cdr().comps();
    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(2, static_cast<Index>(n) * C);
    for (int p = 0; p < n; ++p) {
        coords(0, p * C) = kTwoPi * p / n;
        coords(1, p * C) = 0.5;
        coords(0, p * C + 1) = 1.0;
        coords(1, p * C + 2) = 1.0;
    }
    return coords;
}

Eigen::MatrixXd make_mu() {
    Eigen::MatrixXd mu(3, 1);
    mu << 0.0, 0.0, 5.0;
    return mu;
}

void BM_TapeForward(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    const NetworkWeights w = init_weights(NetworkSpec::p2inn(2, 3), 0);
    const Eigen::MatrixXd coords = make_coords(batch);
    const std::vector<int> point_to_mu(static_cast<size_t>(batch), 0);
    for (auto _ : state) {
        Tape tape(w.theta);
        const int c = tape.input(coords, JetDims::cdr(), batch);
        const int m = tape.input(make_mu(), JetDims::plain(), 1);
        benchmark::DoNotOptimize(
            tape.out(forward_p2inn(tape, w, c, m, point_to_mu).out).data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TapeForward)->Arg(32)->Arg(128)->Arg(512);

void BM_TapeBackward(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    const NetworkWeights w = init_weights(NetworkSpec::p2inn(2, 3), 0);
    const Eigen::MatrixXd coords = make_coords(batch);
    const std::vector<int> point_to_mu(static_cast<size_t>(batch), 0);
    std::vector<CdrCoef> coefs;
    for (int p = 0; p < batch; ++p) coefs.push_back({p, 0.0, 0.0, 5.0});
    for (auto _ : state) {
        Tape tape(w.theta);
        const int c = tape.input(coords, JetDims::cdr(), batch);
        const int m = tape.input(make_mu(), JetDims::plain(), 1);
        const auto fwd = forward_p2inn(tape, w, c, m, point_to_mu);
        const int react = tape.mul(fwd.out, tape.axpb(fwd.out, -1.0, 1.0));
        const int res = tape.cdr_residual(fwd.out, react, coefs);
        const int loss = tape.squared_mean(res);
        benchmark::DoNotOptimize(tape.backward(loss).data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TapeBackward)->Arg(32)->Arg(128)->Arg(512);

void BM_Fft(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<std::complex<double>> a(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] = std::sin(kTwoPi * i / n);
    for (auto _ : state) {
        auto b = a;
        fft_radix2(b, false);
        benchmark::DoNotOptimize(b.data());
    }
}
BENCHMARK(BM_Fft)->Arg(256)->Arg(1024)->Arg(4096);

void BM_SolveCdr(benchmark::State& state) {
    const PdeInstance inst = PdeInstance::cdr(1.0, 0.5, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_cdr(inst, 256, 100).values.data());
    }
}
BENCHMARK(BM_SolveCdr);

void BM_JacobiSvd(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    for (auto _ : state) {
        Eigen::MatrixXd U, V;
        Eigen::VectorXd S;
        jacobi_svd(A, U, S, V);
        benchmark::DoNotOptimize(S.data());
    }
}
BENCHMARK(BM_JacobiSvd)->Arg(25)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
