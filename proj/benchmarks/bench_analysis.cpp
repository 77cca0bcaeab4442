#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "breakpoint/analysis.hpp"

using namespace breakpoint;

namespace {

void BM_FitLogistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = normal(rng);
    const double b = normal(rng);
    x.push_back({a, b});
    y.push_back(unif(rng) < 1.0 / (1.0 + std::exp(-(0.5 - 1.2 * a + 0.4 * b))) ? 1 : 0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic(x, y, {"a", "b"}));
}
BENCHMARK(BM_FitLogistic)->Arg(200)->Arg(2000)->Arg(20000);

void BM_MannWhitneyExact(benchmark::State& state) {
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 8; ++i) {
    a.push_back(2.0 * i);
    b.push_back(2.0 * i + 1.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(mann_whitney(a, b));
}
BENCHMARK(BM_MannWhitneyExact);

void BM_Bootstrap(benchmark::State& state) {
  std::vector<double> v(500);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 2);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_mean_ci(v, 2000, 3));
}
BENCHMARK(BM_Bootstrap);

}  // namespace

BENCHMARK_MAIN();
