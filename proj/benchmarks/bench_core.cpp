#include "coca/nonparanormal.hpp"
#include "coca/psd_project.hpp"
#include "coca/rank_stats.hpp"
#include "coca/sparse_eigen.hpp"

#include <benchmark/benchmark.h>

using namespace coca;

namespace {

NonparanormalSample draw(std::size_t n, std::size_t d) {
  const auto model = synthesize_model(d, std::min<std::size_t>(10, d / 2));
  return sample_nonparanormal(model.sigma0, nonlinear_transforms(d), n, 7);
}

void BM_SpearmanSine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto sample = draw(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(spearman_sine_matrix(sample.x));
}
BENCHMARK(BM_SpearmanSine)->Args({200, 100})->Args({400, 100})->Args({200, 400})->Unit(benchmark::kMicrosecond);

void BM_ProjectPsd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto sample = draw(n, d);  // n well below d keeps the sine matrix indefinite
  const auto r = spearman_sine_matrix(sample.x);
  for (auto _ : state) benchmark::DoNotOptimize(project_psd_maxnorm(r));
  state.counters["min_eig_in"] = min_eigenvalue(r.matrix);
}
BENCHMARK(BM_ProjectPsd)->Args({5, 10})->Args({20, 50})->Args({40, 100})->Unit(benchmark::kMillisecond);

void BM_Qtpm(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto model = synthesize_model(d, 10);
  SolverOptions opts;
  opts.q = static_cast<double>(state.range(1)) / 100.0;
  opts.radius = opts.q == 0.0 ? 10.0 : 3.0;
  for (auto _ : state) benchmark::DoNotOptimize(qtpm(model.sigma0, opts));
}
BENCHMARK(BM_Qtpm)->Args({100, 0})->Args({100, 50})->Args({400, 0})->Unit(benchmark::kMicrosecond);

void BM_TruncationLevel(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = 1.0 / static_cast<double>(i + 1);
  for (auto _ : state) benchmark::DoNotOptimize(find_truncation_level(x, 0.5, 4.0));
}
BENCHMARK(BM_TruncationLevel)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
