#include <benchmark/benchmark.h>

#include "breakpoint/complexity.hpp"
#include "breakpoint/repo_model.hpp"

using namespace breakpoint;

namespace {

const Repository& fixture_repo() {
  static const Repository repo = ingest_repository(std::string(BREAKPOINT_FIXTURES_DIR) + "/pyrepo", "true");
  return repo;
}

void BM_MeasureAllUnits(benchmark::State& state) {
  const Repository& repo = fixture_repo();
  for (auto _ : state) {
    for (const auto& u : repo.units) benchmark::DoNotOptimize(measure_complexity(u));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * repo.units.size()));
}
BENCHMARK(BM_MeasureAllUnits);

void BM_HalsteadCounts(benchmark::State& state) {
  const Repository& repo = fixture_repo();
  for (auto _ : state) {
    for (const auto& u : repo.units) benchmark::DoNotOptimize(halstead_counts(u));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * repo.units.size()));
}
BENCHMARK(BM_HalsteadCounts);

void BM_IngestAndGraph(benchmark::State& state) {
  for (auto _ : state) {
    const Repository repo = ingest_repository(std::string(BREAKPOINT_FIXTURES_DIR) + "/pyrepo", "true");
    benchmark::DoNotOptimize(build_call_graph(repo));
  }
}
BENCHMARK(BM_IngestAndGraph)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
