// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "ergocert/kernels.hpp"
#include "ergocert/rng.hpp"

namespace k = ergocert::kernels;

namespace {

struct Inputs {
  Eigen::MatrixXd a, b;
  Eigen::VectorXd mu, h;
  std::vector<double> weights;
};

Inputs make_inputs(Eigen::Index n) {
  ergocert::Rng rng(static_cast<std::uint64_t>(n));
  Inputs in{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n), Eigen::VectorXd(n), Eigen::VectorXd(n), std::vector<double>(24)};
  for (Eigen::Index i = 0; i < n; ++i) {
    in.mu[i] = rng.uniform(0.5, 2.0);
    in.h[i] = rng.uniform(0.0, 1.0 / static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      in.a(i, j) = rng.uniform() / static_cast<double>(n);
      in.b(i, j) = rng.uniform() / static_cast<double>(n);
    }
  }
  for (auto& w : in.weights) w = rng.uniform();
  return in;
}

template <class F>
void run(benchmark::State& state, F f) {
  const Inputs in = make_inputs(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f(in));
}

}  // namespace

static void BM_column_norms_serial(benchmark::State& s) { run(s, [](const Inputs& in) { return k::serial::column_norms(in.a, in.mu); }); }
static void BM_column_norms_omp(benchmark::State& s) { run(s, [](const Inputs& in) { return k::omp::column_norms(in.a, in.mu); }); }
static void BM_column_deficiency_serial(benchmark::State& s) {
  run(s, [](const Inputs& in) { return k::serial::column_deficiency(in.a, in.mu, in.h); });
}
static void BM_column_deficiency_omp(benchmark::State& s) {
  run(s, [](const Inputs& in) { return k::omp::column_deficiency(in.a, in.mu, in.h); });
}
static void BM_column_infimum_serial(benchmark::State& s) { run(s, [](const Inputs& in) { return k::serial::column_infimum(in.a, in.mu); }); }
static void BM_column_infimum_omp(benchmark::State& s) { run(s, [](const Inputs& in) { return k::omp::column_infimum(in.a, in.mu); }); }
static void BM_entrywise_min_serial(benchmark::State& s) { run(s, [](const Inputs& in) { return k::serial::entrywise_min(in.a, in.b); }); }
static void BM_entrywise_min_omp(benchmark::State& s) { run(s, [](const Inputs& in) { return k::omp::entrywise_min(in.a, in.b); }); }
static void BM_poisson_series_serial(benchmark::State& s) {
  run(s, [](const Inputs& in) { return k::serial::poisson_series(in.a, in.weights, in.b); });
}
static void BM_poisson_series_omp(benchmark::State& s) {
  run(s, [](const Inputs& in) { return k::omp::poisson_series(in.a, in.weights, in.b); });
}

BENCHMARK(BM_column_norms_serial)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_column_norms_omp)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_column_deficiency_serial)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_column_deficiency_omp)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_column_infimum_serial)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_column_infimum_omp)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_entrywise_min_serial)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_entrywise_min_omp)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_poisson_series_serial)->RangeMultiplier(4)->Range(64, 256);
BENCHMARK(BM_poisson_series_omp)->RangeMultiplier(4)->Range(64, 256);

BENCHMARK_MAIN();
