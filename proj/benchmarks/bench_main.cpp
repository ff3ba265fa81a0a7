#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "meanloop/fourier.hpp"
#include "meanloop/hessian.hpp"
#include "meanloop/solver.hpp"
#include "meanloop/twisted_operator.hpp"

namespace {

using namespace meanloop;

void BM_assemble(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int N = static_cast<int>(state.range(1));
    const OperatorSpec spec = random_instance(n, 2, 17, false, N);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_matrix(spec));
}
BENCHMARK(BM_assemble)->Args({1, 256})->Args({3, 256});

void BM_singular_values(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const OperatorSpec spec = random_instance(n, 2, 17, false, 256);
    const Eigen::MatrixXd M = assemble_matrix(spec);
    for (auto _ : state) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
        benchmark::DoNotOptimize(svd.singularValues());
    }
}
BENCHMARK(BM_singular_values)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_spectral_edges(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const OperatorSpec spec = random_instance(n, 2, 17, false, 256);
    const Eigen::MatrixXd M = assemble_matrix(spec);
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_spectral_edges(M, 2 * n + 4, 10, 3));
}
BENCHMARK(BM_spectral_edges)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_apply(benchmark::State& state) {
    const OperatorSpec spec = random_instance(3, 4, 17, false, 256);
    const FieldAlongLoop xi(spec.grid, fourier::random_band_limited(6, spec.grid, 4, 5));
    for (auto _ : state) benchmark::DoNotOptimize(apply(spec, xi));
}
BENCHMARK(BM_apply);

void BM_spectral_derivative(benchmark::State& state) {
    const TimeGrid grid(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd u = fourier::random_band_limited(4, grid, 8, 11);
    for (auto _ : state) benchmark::DoNotOptimize(fourier::derivative(u));
}
BENCHMARK(BM_spectral_derivative)->Arg(256)->Arg(512);

void BM_harmonic_solve(benchmark::State& state) {
    const SystemSpec sys = make_system("example2-harmonic");
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            self_consistent_solve(sys.pair, default_config_for(sys, 1)));
    }
}
BENCHMARK(BM_harmonic_solve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
