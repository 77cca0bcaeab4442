#include <string>

#include <benchmark/benchmark.h>

#include "breakpoint/python/lexer.hpp"
#include "breakpoint/python/parser.hpp"
#include "breakpoint/repo_model.hpp"

using namespace breakpoint;

namespace {

// The fixture sources concatenated, repeated to the requested size in KiB.
std::string corpus(std::size_t kib) {
  const Repository repo = ingest_repository(std::string(BREAKPOINT_FIXTURES_DIR) + "/pyrepo", "true");
  std::string one;
  for (const auto& s : repo.sources) one += s.text + "\n";
  std::string out;
  while (out.size() < kib * 1024) out += one;
  return out;
}

void BM_Tokenize(benchmark::State& state) {
  const std::string src = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(python::tokenize(src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_Tokenize)->Arg(64)->Arg(512);

void BM_Parse(benchmark::State& state) {
  const std::string src = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(python::check_syntax(src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_Parse)->Arg(64)->Arg(512);

void BM_ExtractUnits(benchmark::State& state) {
  const std::string src = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(units_of_source("m.py", src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_ExtractUnits)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
