#include <atomic>
#include <random>
#include <set>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/graph_metrics.hpp"
#include "breakpoint/taskgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace breakpoint;

namespace {

const std::string kCommand(kDefaultTestCommand);

TaskInstance synthetic_task(const std::string& target, double loc_pct, double harmonic_pct) {
  TaskInstance t;
  Corruption c;
  c.target = target;
  c.corrupted_body = "def f():\n    raise NotImplementedError\n";
  t.corruptions = {c};
  TargetMetrics m;
  m.raw.unit = target;
  m.normalized.unit = target;
  m.normalized.z.assign(metric_names().size(), 0.0);
  m.normalized.percentile.assign(metric_names().size(), 0.0);
  for (std::size_t i = 0; i < metric_names().size(); ++i) {
    if (metric_names()[i] == "loc") m.normalized.percentile[i] = loc_pct;
    if (metric_names()[i] == "harmonic") m.normalized.percentile[i] = harmonic_pct;
  }
  t.metrics.emplace(target, m);
  t.task_id = compute_task_id("c", t.mode, t.corruptions);
  return t;
}

}  // namespace

TEST_CASE("multifunction sets respect the distance bound") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const CallGraph g = bptest::random_graph(seed, 40, 0.1);
    for (int k = 2; k <= 4; ++k) {
      CAPTURE(seed);
      CAPTURE(k);
      const auto sel = select_multifunction_sets(g, k, 10, seed);
      std::set<std::vector<std::string>> distinct(sel.sets.begin(), sel.sets.end());
      CHECK(distinct.size() == sel.sets.size());
      for (const auto& s : sel.sets) {
        REQUIRE(s.size() == static_cast<std::size_t>(k));
        CHECK(std::is_sorted(s.begin(), s.end()));
        for (std::size_t i = 0; i < s.size(); ++i) {
          for (std::size_t j = i + 1; j < s.size(); ++j) {
            const auto d = chain_distance(g, s[i], s[j]);
            REQUIRE(d.has_value());
            CHECK(*d <= 4);
            CHECK(s[i] != s[j]);
          }
        }
      }
      CHECK(sel.short_of_count == (sel.sets.size() < 10));
      CHECK(select_multifunction_sets(g, k, 10, seed).sets == sel.sets);
    }
  }
}

TEST_CASE("multifunction pool and limits") {
  const CallGraph g = CallGraph::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  const std::vector<std::string> pool = {"n0", "n1", "n5"};
  const auto sel = select_multifunction_sets(g, 2, 10, 1, 4, &pool);
  CHECK(sel.sets.size() == 2);  // n0-n5 is 5 apart
  CHECK(sel.short_of_count);
  CHECK(select_multifunction_sets(g, 3, 100, 1, 1).sets.empty());
  CHECK_THROWS_AS(select_multifunction_sets(g, 5, 1, 1), Error);
  CHECK_THROWS_AS(select_multifunction_sets(g, 0, 1, 1), Error);
}

TEST_CASE("hard set rule") {
  std::mt19937_64 rng(4);
  std::vector<TaskInstance> tasks;
  for (int i = 0; i < 200; ++i) {
    tasks.push_back(synthetic_task("m.py::f" + std::to_string(i), static_cast<double>(rng() % 101) / 100.0,
                                   static_cast<double>(rng() % 101) / 100.0));
  }
  const auto hard = select_hard_set(tasks, "loc", "harmonic", 0.90);
  CHECK_FALSE(hard.empty());
  for (const auto& t : hard) {
    CHECK(t.max_percentile("loc") >= 0.90);
    CHECK(t.max_percentile("harmonic") >= 0.90);
  }
  std::size_t expected = 0;
  for (const auto& t : tasks) expected += (t.max_percentile("loc") >= 0.9 && t.max_percentile("harmonic") >= 0.9);
  CHECK(hard.size() == expected);
  CHECK(select_hard_set(tasks, "loc", "harmonic", 0.0).size() == tasks.size());
}

TEST_CASE("task json round trip and ids") {
  TaskInstance t = synthetic_task("m.py::f", 0.5, 0.25);
  t.repo_ref = {"/src", "abc"};
  t.failing_tests = {"a::t1", "a::t2"};
  t.seed = 99;
  const auto j = to_json(t);
  const TaskInstance back = task_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.targets() == std::vector<std::string>{"m.py::f"});
  CHECK(back.max_percentile("harmonic") == 0.25);
  CHECK(t.task_id.rfind("bp-", 0) == 0);
  CHECK(t.task_id.size() == 19);
  CHECK(compute_task_id("c", TaskMode::Remove, t.corruptions) == t.task_id);
  CHECK(compute_task_id("d", TaskMode::Remove, t.corruptions) != t.task_id);
  auto broken = j;
  broken.erase("failing_tests");
  CHECK_THROWS_AS(task_from_json(broken), Error);
  bptest::TempDir dir;
  write_task(dir.path() / "tasks" / (t.task_id + ".json"), t);
  CHECK(to_json(read_task(dir.path() / "tasks" / (t.task_id + ".json"))) == j);
  CHECK(load_task_store(dir.path()).size() == 1);
}

TEST_CASE("structural invariants") {
  TaskInstance t = synthetic_task("m.py::f", 0, 0);
  t.failing_tests = {"a", "b", "c", "d", "e"};
  CHECK(check_task_invariants(t, 5).empty());
  CHECK(check_task_invariants(t, 6) == "too few failing tests");
  t.mode = TaskMode::Discovery;
  CHECK(check_task_invariants(t, 5) == "discovery-mode task with a deletion");
  t.corruptions[0].method = CorruptionMethod::Adversarial;
  CHECK(check_task_invariants(t, 5).empty());
  Corruption far = t.corruptions[0];
  far.target = "n5";
  t.corruptions[0].target = "n0";
  t.corruptions.push_back(far);
  const CallGraph g = CallGraph::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  CHECK(check_task_invariants(t, 5, &g) == "targets too far apart on the call graph");
  CHECK(check_task_invariants(t, 5, &g, 5).empty());
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(Errc::IoError, "x");
                  }),
                  Error);
}

TEST_CASE("deletion tasks on the small fixture") {
  const Repository repo = ingest_repository(bptest::fixtures() / "minirepo", kCommand);
  const CallGraph g = build_call_graph(repo);
  const SuiteReport base = baseline(repo);
  const auto recs = compute_metrics(repo, g);
  GenerationConfig cfg;
  cfg.seed = 5;
  const GenerationReport rep = generate_tasks(repo, g, base, recs, cfg);
  CHECK(rep.tasks.size() == 3);
  for (const auto& t : rep.tasks) {
    CAPTURE(t.task_id);
    CHECK(check_task_invariants(t, 5, &g).empty());
    CHECK(t.mode == TaskMode::Remove);
    CHECK(t.seed == 5);
    CHECK(t.metrics.count(t.targets().front()) == 1);
    const ValidationResult v = validate_task(repo, t.corruptions, base);
    CHECK(v.accepted);
    CHECK(v.failing_tests == t.failing_tests);
  }
  CHECK(std::is_sorted(rep.tasks.begin(), rep.tasks.end(),
                       [](const TaskInstance& a, const TaskInstance& b) { return a.task_id < b.task_id; }));
  const auto j = rep.to_json();
  CHECK(j.dump().find("\"candidates\"") != std::string::npos);
}

TEST_CASE("validation rejects weak corruptions") {
  const Repository repo = ingest_repository(bptest::fixtures() / "minirepo", kCommand);
  const SuiteReport base = baseline(repo);
  Corruption c;
  c.target = "arith.py::clamp";
  c.method = CorruptionMethod::Adversarial;
  c.corrupted_body =
      "def clamp(x, lo, hi):\n    \"\"\"Clamp x into [lo, hi].\"\"\"\n    if x < lo:\n        return lo\n"
      "    if x > hi:\n        return hi + 1\n    return x\n";
  const ValidationResult v = validate_task(repo, {c}, base);
  CHECK_FALSE(v.accepted);
  CHECK(v.reason == "too_few_failures");
  CHECK(v.failing_tests.size() == 1);
  CHECK(validate_task(repo, {c}, base, 1).accepted);
}

TEST_CASE("restoring the originals undoes every task") {
  const Repository repo = ingest_repository(bptest::fixtures() / "minirepo", kCommand);
  const CallGraph g = build_call_graph(repo);
  const SuiteReport base = baseline(repo);
  GenerationConfig cfg;
  cfg.seed = 9;
  cfg.adversarial = true;
  cfg.min_failing = 2;
  const GenerationReport rep = generate_tasks(repo, g, base, compute_metrics(repo, g), cfg);
  REQUIRE_FALSE(rep.tasks.empty());
  std::map<std::string, const FunctionUnit*> by_digest;
  for (const auto& u : repo.units) by_digest[content_digest(u.text())] = &u;
  for (const auto& t : rep.tasks) {
    CAPTURE(t.task_id);
    Sandbox sb(repo.root);
    for (const auto& c : t.corruptions) sb.replace_unit(c.target, c.corrupted_body);
    CHECK(failing_diff(base, run_suite(sb.root(), kCommand)) == t.failing_tests);
    for (const auto& c : t.corruptions) {
      const auto it = by_digest.find(c.original_digest);
      REQUIRE(it != by_digest.end());
      CHECK(it->second->id == c.target);
      sb.replace_unit(c.target, it->second->text());
    }
    const SuiteReport restored = run_suite(sb.root(), kCommand);
    CHECK(restored.exit == SuiteExit::Completed);
    CHECK(restored.failing().empty());
  }
}
