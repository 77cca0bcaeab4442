#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/corruption.hpp"
#include "breakpoint/harness.hpp"
#include "breakpoint/metrics_table.hpp"
#include "breakpoint/repo_model.hpp"
#include "breakpoint/task.hpp"

namespace breakpoint {

struct MultiSetSelection {
  std::vector<std::vector<std::string>> sets;  // each sorted by id
  bool short_of_count = false;                 // fewer qualifying sets than requested
};

/// Up to `count` distinct k-sets of nodes (drawn from `pool` when given) whose
/// pairwise chain distance is at most `max_distance`, in a seeded order.
/// Throws Error(InvalidArgument) unless 1 <= k <= max_k.
MultiSetSelection select_multifunction_sets(const CallGraph& g, int k, std::size_t count, std::uint64_t seed,
                                            std::size_t max_distance = 4,
                                            const std::vector<std::string>* pool = nullptr, int max_k = 4);

struct ValidationResult {
  bool accepted = false;
  std::set<std::string> failing_tests;
  std::string reason;  // "ok", "too_few_failures", "timeout", "crashed", "apply_failed"
};

/// Applies all corruptions to a fresh copy and runs the suite.
ValidationResult validate_task(const Repository& repo, const std::vector<Corruption>& corruptions,
                               const SuiteReport& baseline, int min_failing = 5,
                               const HarnessOptions& harness = {});

/// Tasks whose (maximum over targets) percentile is at least `pct` on both
/// metrics.
std::vector<TaskInstance> select_hard_set(const std::vector<TaskInstance>& tasks,
                                          std::string_view complexity_metric = "loc",
                                          std::string_view centrality_metric = "harmonic", double pct = 0.90);

using CorruptionClientFactory = std::function<std::unique_ptr<CorruptionClient>(std::uint64_t seed)>;

struct GenerationConfig {
  bool deletion = true;           // remove-mode tasks
  bool adversarial = false;       // single-target discovery tasks
  std::vector<int> multifunction;  // k values (>= 2) for multi-target discovery tasks
  std::size_t sets_per_k = 8;
  std::size_t max_distance = 4;
  int min_failing = 5;
  int floor = 2;
  int test_budget = 5;
  int max_tool_calls = 10;
  std::size_t max_targets = 0;  // 0: every eligible unit
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  HarnessOptions harness;
  CorruptionClientFactory client_factory;  // defaults to the scripted client
};

struct GenerationReport {
  std::vector<TaskInstance> tasks;  // sorted by task id
  std::map<std::string, int> rejected;  // by reason
  int candidates = 0;
  nlohmann::json to_json() const;
};

/// Per-target metrics attached to tasks, keyed by unit id.
std::map<std::string, TargetMetrics> target_metrics(const std::vector<MetricsRecord>& records);

GenerationReport generate_tasks(const Repository& repo, const CallGraph& graph, const SuiteReport& baseline,
                                const std::vector<MetricsRecord>& records, const GenerationConfig& config);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace breakpoint
