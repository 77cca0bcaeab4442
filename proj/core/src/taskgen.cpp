#include "breakpoint/taskgen.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "breakpoint/error.hpp"

namespace breakpoint {
namespace {

std::vector<std::size_t> undirected_within(const CallGraph& g, std::size_t source, std::size_t max_distance) {
  std::vector<std::size_t> dist(g.size(), SIZE_MAX);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  std::vector<std::size_t> out;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (v != source) out.push_back(v);
    if (dist[v] == max_distance) continue;
    for (const auto* next : {&g.successors(v), &g.predecessors(v)}) {
      for (std::size_t w : *next) {
        if (dist[w] == SIZE_MAX) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

constexpr std::size_t kEnumerationCap = 200000;

}  // namespace

MultiSetSelection select_multifunction_sets(const CallGraph& g, int k, std::size_t count, std::uint64_t seed,
                                            std::size_t max_distance, const std::vector<std::string>* pool,
                                            int max_k) {
  if (k < 1 || k > max_k) throw Error(Errc::InvalidArgument, "k must lie in [1, " + std::to_string(max_k) + "]");
  if (count < 1) throw Error(Errc::InvalidArgument, "count must be at least 1");

  std::vector<char> allowed(g.size(), pool == nullptr ? 1 : 0);
  if (pool != nullptr) {
    for (const auto& id : *pool) {
      if (auto v = g.find(id)) allowed[*v] = 1;
    }
  }
  std::vector<std::vector<std::size_t>> near(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!allowed[v]) continue;
    for (std::size_t w : undirected_within(g, v, max_distance)) {
      if (w > v && allowed[w]) near[v].push_back(w);
    }
  }

  // Every qualifying set, as increasing index tuples.
  std::vector<std::vector<std::size_t>> all;
  std::vector<std::size_t> chosen;
  auto compatible = [&](std::size_t w) {
    for (std::size_t c : chosen) {
      if (!std::binary_search(near[c].begin(), near[c].end(), w)) return false;
    }
    return true;
  };
  std::function<void(const std::vector<std::size_t>&)> extend = [&](const std::vector<std::size_t>& cands) {
    if (all.size() >= kEnumerationCap) return;
    if (static_cast<int>(chosen.size()) == k) {
      all.push_back(chosen);
      return;
    }
    for (std::size_t w : cands) {
      if (!compatible(w)) continue;
      chosen.push_back(w);
      extend(near[w]);
      chosen.pop_back();
    }
  };
  for (std::size_t v = 0; v < g.size() && all.size() < kEnumerationCap; ++v) {
    if (!allowed[v]) continue;
    chosen = {v};
    if (k == 1) {
      all.push_back(chosen);
      continue;
    }
    extend(near[v]);
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = all.size(); i > 1; --i) {
    std::swap(all[i - 1], all[static_cast<std::size_t>(rng() % i)]);
  }
  MultiSetSelection out;
  out.short_of_count = all.size() < count;
  for (std::size_t i = 0; i < all.size() && i < count; ++i) {
    std::vector<std::string> ids;
    for (std::size_t v : all[i]) ids.push_back(g.nodes()[v]);
    std::sort(ids.begin(), ids.end());
    out.sets.push_back(std::move(ids));
  }
  return out;
}

ValidationResult validate_task(const Repository& repo, const std::vector<Corruption>& corruptions,
                               const SuiteReport& baseline, int min_failing, const HarnessOptions& harness) {
  ValidationResult r;
  Sandbox sandbox(repo.root);
  try {
    for (const auto& c : corruptions) sandbox.replace_unit(c.target, c.corrupted_body);
  } catch (const Error&) {
    r.reason = "apply_failed";
    return r;
  }
  const SuiteReport after = run_suite(sandbox.root(), repo.test_command, harness);
  if (after.exit == SuiteExit::Timeout) {
    r.reason = "timeout";
    return r;
  }
  if (after.exit == SuiteExit::Crashed) {
    r.reason = "crashed";
    return r;
  }
  r.failing_tests = failing_diff(baseline, after);
  r.accepted = static_cast<int>(r.failing_tests.size()) >= min_failing;
  r.reason = r.accepted ? "ok" : "too_few_failures";
  return r;
}

std::vector<TaskInstance> select_hard_set(const std::vector<TaskInstance>& tasks, std::string_view complexity_metric,
                                          std::string_view centrality_metric, double pct) {
  std::vector<TaskInstance> out;
  for (const auto& t : tasks) {
    if (t.max_percentile(complexity_metric) >= pct && t.max_percentile(centrality_metric) >= pct) {
      out.push_back(t);
    }
  }
  return out;
}

nlohmann::json GenerationReport::to_json() const {
  std::map<std::string, int> by_mode;
  std::map<std::string, int> by_size;
  for (const auto& t : tasks) {
    ++by_mode[std::string(breakpoint::to_string(t.mode))];
    ++by_size[std::to_string(t.corruptions.size())];
  }
  return {{"candidates", candidates},
          {"accepted", tasks.size()},
          {"accepted_by_mode", by_mode},
          {"accepted_by_corruption_count", by_size},
          {"rejected", rejected}};
}

std::map<std::string, TargetMetrics> target_metrics(const std::vector<MetricsRecord>& records) {
  std::map<std::string, TargetMetrics> out;
  if (records.size() < 2) return out;
  const auto normalized = normalize(records);
  for (std::size_t i = 0; i < records.size(); ++i) out[records[i].unit] = {records[i], normalized[i]};
  return out;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct Candidate {
  TaskMode mode;
  std::vector<Corruption> corruptions;
  std::string rejection;  // set when no corruption could be produced
};

TaskInstance make_task(const Repository& repo, const Candidate& c, const ValidationResult& v,
                       const std::map<std::string, TargetMetrics>& metrics, std::uint64_t seed) {
  TaskInstance t;
  t.repo_ref = {repo.root.string(), repo.commit};
  t.mode = c.mode;
  t.corruptions = c.corruptions;
  t.failing_tests = v.failing_tests;
  for (const auto& corr : c.corruptions) {
    auto it = metrics.find(corr.target);
    if (it != metrics.end()) t.metrics.emplace(corr.target, it->second);
  }
  t.seed = seed;
  t.task_id = compute_task_id(repo.commit, t.mode, t.corruptions);
  return t;
}

}  // namespace

GenerationReport generate_tasks(const Repository& repo, const CallGraph& graph, const SuiteReport& baseline,
                                const std::vector<MetricsRecord>& records, const GenerationConfig& config) {
  const auto metrics = target_metrics(records);
  CorruptionClientFactory factory = config.client_factory;
  if (!factory) {
    const int floor = config.floor;
    factory = [floor](std::uint64_t seed) { return std::make_unique<ScriptedCorruptionClient>(seed, floor); };
  }

  std::vector<const FunctionUnit*> units;
  for (const auto& u : repo.units) units.push_back(&u);
  std::sort(units.begin(), units.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  if (config.max_targets > 0 && units.size() > config.max_targets) {
    std::vector<std::string> ids;
    for (const auto* u : units) ids.push_back(u->id);
    seeded_shuffle(ids, mix_seed(config.seed, "targets"));
    ids.resize(config.max_targets);
    std::sort(ids.begin(), ids.end());
    units.clear();
    for (const auto& id : ids) units.push_back(&repo.at(id));
  }

  std::vector<Candidate> candidates;
  std::map<std::string, int> rejected;

  if (config.deletion) {
    for (const auto* u : units) {
      if (u->kind == UnitKind::Class) continue;
      Candidate c{TaskMode::Remove, {}, {}};
      try {
        c.corruptions.push_back(delete_function(repo, u->id));
      } catch (const Error&) {
        ++rejected["unsupported_target"];
        continue;
      }
      candidates.push_back(std::move(c));
    }
  }

  // Adversarial corruptions, each required to break `floor` tests on its own.
  const bool need_adversarial = config.adversarial || !config.multifunction.empty();
  std::vector<std::optional<AdversarialResult>> adversarial(units.size());
  if (need_adversarial) {
    AdversarialOptions opts;
    opts.test_budget = config.test_budget;
    opts.max_tool_calls = config.max_tool_calls;
    opts.floor = config.floor;
    opts.harness = config.harness;
    std::vector<std::string> errors(units.size());
    parallel_for(units.size(), config.jobs, [&](std::size_t i) {
      auto client = factory(mix_seed(config.seed, units[i]->id));
      try {
        adversarial[i] = adversarial_corrupt(repo, units[i]->id, baseline, *client, opts);
      } catch (const Error& e) {
        if (e.code() != Errc::NoValidCorruption) throw;
        errors[i] = "no_valid_corruption";
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) ++rejected[e];
    }
  }
  if (config.adversarial) {
    for (const auto& a : adversarial) {
      if (a) candidates.push_back({TaskMode::Discovery, {a->corruption}, {}});
    }
  }
  if (!config.multifunction.empty()) {
    std::map<std::string, Corruption> pool;
    for (std::size_t i = 0; i < units.size(); ++i) {
      // Classes overlap their own methods, so they stay out of combined sets.
      if (adversarial[i] && units[i]->kind != UnitKind::Class) pool.emplace(units[i]->id, adversarial[i]->corruption);
    }
    std::vector<std::string> ids;
    for (const auto& [id, c] : pool) ids.push_back(id);
    for (int k : config.multifunction) {
      if (k < 2) continue;
      const auto selection = select_multifunction_sets(graph, k, config.sets_per_k,
                                                       mix_seed(config.seed, "k" + std::to_string(k)),
                                                       config.max_distance, &ids);
      if (selection.short_of_count) ++rejected["not_enough_candidates_k" + std::to_string(k)];
      for (const auto& set : selection.sets) {
        Candidate c{TaskMode::Discovery, {}, {}};
        for (const auto& id : set) c.corruptions.push_back(pool.at(id));
        candidates.push_back(std::move(c));
      }
    }
  }

  std::vector<ValidationResult> results(candidates.size());
  parallel_for(candidates.size(), config.jobs, [&](std::size_t i) {
    results[i] = validate_task(repo, candidates[i].corruptions, baseline, config.min_failing, config.harness);
  });

  GenerationReport report;
  report.candidates = static_cast<int>(candidates.size());
  std::map<std::string, TaskInstance> by_id;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!results[i].accepted) {
      ++rejected[results[i].reason];
      continue;
    }
    TaskInstance t = make_task(repo, candidates[i], results[i], metrics, config.seed);
    by_id.emplace(t.task_id, std::move(t));
  }
  for (auto& [id, t] : by_id) report.tasks.push_back(std::move(t));
  report.rejected = std::move(rejected);
  return report;
}

}  // namespace breakpoint
