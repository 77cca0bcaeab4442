#include <random>

#include <benchmark/benchmark.h>

#include "breakpoint/graph_metrics.hpp"
#include "breakpoint/repo_model.hpp"

using namespace breakpoint;

namespace {

// Sparse random digraph with about `degree` out-edges per node.
CallGraph sparse_graph(std::size_t n, double degree) {
  std::mt19937_64 rng(n);
  std::bernoulli_distribution edge(degree / static_cast<double>(n));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && edge(rng)) edges.emplace_back(a, b);
    }
  }
  return CallGraph::from_edges(n, std::move(edges));
}

void BM_PageRank(benchmark::State& state) {
  const CallGraph g = sparse_graph(static_cast<std::size_t>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(pagerank(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PageRank)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_Betweenness(benchmark::State& state) {
  const CallGraph g = sparse_graph(static_cast<std::size_t>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(betweenness_all(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Betweenness)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_Centrality(benchmark::State& state) {
  const CallGraph g = sparse_graph(static_cast<std::size_t>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_centrality(g));
}
BENCHMARK(BM_Centrality)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
