#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <random>

#include "rmkl/expansion.hpp"
#include "rmkl/regularizer.hpp"
#include "rmkl/simulate.hpp"
#include "rmkl/spectral.hpp"

using namespace rmkl;

namespace {

Eigen::MatrixXd random_psd(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(eng);
    Eigen::MatrixXd c = a * a.transpose() / static_cast<double>(n);
    return 0.5 * (c + c.transpose());
}

void BM_antiderivative_line(benchmark::State& state) {
    const auto n = state.range(0);
    auto g = make_grid(1, -5.0, 5.0, static_cast<int>(n));
    AntiderivativeOperator op(g);
    const Eigen::VectorXd w = Eigen::VectorXd::Random(n);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply(w));
}
BENCHMARK(BM_antiderivative_line)->Arg(64)->Arg(256)->Arg(1024);

void BM_antiderivative_plane(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto g = make_grid(2, -5.0, 5.0, n);
    AntiderivativeOperator op(g);
    const Eigen::VectorXd w = Eigen::VectorXd::Random(n * n);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply(w));
}
BENCHMARK(BM_antiderivative_plane)->Arg(16)->Arg(32)->Arg(64);

void BM_antiderivative_cov(benchmark::State& state) {
    const auto n = state.range(0);
    auto g = make_grid(1, -5.0, 5.0, static_cast<int>(n));
    const CovarianceGridMeasure c{g, random_psd(n, 1)};
    for (auto _ : state) benchmark::DoNotOptimize(antiderivative_cov(c));
}
BENCHMARK(BM_antiderivative_cov)->Arg(32)->Arg(64)->Arg(128);

void BM_eigendecompose(benchmark::State& state) {
    const auto n = state.range(0);
    auto g = make_grid(1, -5.0, 5.0, static_cast<int>(n));
    const auto w = build_weight_measure(g);
    const CovarianceGridMeasure c{g, random_psd(n, 2)};
    for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(c, w, 1e-12));
}
BENCHMARK(BM_eigendecompose)->Arg(32)->Arg(64);

void BM_kl_expand(benchmark::State& state) {
    const auto n = state.range(0);
    auto g = make_grid(1, -5.0, 5.0, static_cast<int>(n));
    const auto w = build_weight_measure(g);
    const CovarianceGridMeasure c{g, random_psd(n, 3)};
    for (auto _ : state) benchmark::DoNotOptimize(kl_expand(c, w, 1e-12));
}
BENCHMARK(BM_kl_expand)->Arg(32)->Arg(64);

void BM_sample_gaussian(benchmark::State& state) {
    const auto n = state.range(0);
    auto g = make_grid(1, -5.0, 5.0, static_cast<int>(n));
    const CovarianceGridMeasure c{g, random_psd(n, 4)};
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_gaussian(c, RngSpec{9}, 100));
}
BENCHMARK(BM_sample_gaussian)->Arg(32)->Arg(64);

} // namespace

BENCHMARK_MAIN();
