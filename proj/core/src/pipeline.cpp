#include "breakpoint/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>

#include <fcntl.h>
#include <unistd.h>

#include "breakpoint/agents.hpp"
#include "breakpoint/csv.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/metrics_table.hpp"
#include "breakpoint/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace breakpoint {
namespace {

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <class T>
void read_field(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string test_command_of(const PipelineConfig& c) {
  return c.test_command.empty() ? std::string(kDefaultTestCommand) : c.test_command;
}

HarnessOptions harness_of(const PipelineConfig& c) {
  HarnessOptions h;
  h.cap_seconds = c.cap_seconds;
  return h;
}

// Removes the store lock on scope exit.
class StoreLock {
 public:
  explicit StoreLock(fs::path path) : path_(std::move(path)) {
    fs::create_directories(path_.parent_path());
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(Errc::StoreLocked, "task store is locked: " + path_.string());
    static constexpr char kText[] = "locked\n";
    [[maybe_unused]] const auto n = ::write(fd, kText, sizeof kText - 1);
    ::close(fd);
  }
  ~StoreLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  fs::path path_;
};

struct Ingested {
  Repository repo;
  CallGraph graph;
  std::vector<MetricsRecord> records;
};

Ingested ingest_and_write(const PipelineConfig& config) {
  const StorePaths store{config.store};
  fs::create_directories(store.root);
  Ingested in{ingest_repository(config.repo, test_command_of(config)), {}, {}};
  in.graph = build_call_graph(in.repo);
  in.records = compute_metrics(in.repo, in.graph);
  write_json(store.root / "snapshot.json", snapshot_json(in.repo, in.graph));
  write_metrics_csv(store.root / "metrics.csv", in.records);
  write_json(store.root / "metrics_schema.json", metrics_schema());
  if (in.records.size() >= 3) write_correlations_csv(store.root / "correlations.csv", correlation_matrix(in.records));
  return in;
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidArgument, "config: " + what); };
  if (store.empty()) fail("store is required");
  if (jobs < 1) fail("jobs must be at least 1");
  if (!(cap_seconds > 0.0)) fail("cap_seconds must be positive");
  if (min_failing < 1) fail("min_failing must be at least 1");
  if (floor < 1) fail("floor must be at least 1");
  if (test_budget < 1) fail("test_budget must be at least 1");
  if (max_tool_calls < 1) fail("max_tool_calls must be at least 1");
  if (sets_per_k < 1) fail("sets_per_k must be at least 1");
  if (max_distance < 1) fail("max_distance must be at least 1");
  for (int k : multifunction) {
    if (k < 2 || k > 4) fail("multifunction sizes must lie in [2, 4]");
  }
  try {
    breakpoint::budget_preset(budget_preset);
  } catch (const Error& e) {
    fail(e.what());
  }
  if (hard_set_pct < 0.0 || hard_set_pct > 1.0) fail("hard_set_pct must lie in [0, 1]");
  if (grid_bins < 1) fail("grid_bins must be at least 1");
  const auto& names = metric_names();
  if (std::find(names.begin(), names.end(), x_metric) == names.end()) fail("unknown x_metric " + x_metric);
  if (std::find(names.begin(), names.end(), y_metric) == names.end()) fail("unknown y_metric " + y_metric);
  if (corruption_client != "scripted" && corruption_client != "llm") fail("corruption_client must be scripted or llm");
  if (corruption_client == "llm" && llm_model.empty()) fail("llm_model is required for the llm corruption client");
}

json PipelineConfig::to_json() const {
  return {{"repo", repo.generic_string()},
          {"test_command", test_command},
          {"store", store.generic_string()},
          {"seed", seed},
          {"jobs", jobs},
          {"cap_seconds", cap_seconds},
          {"deletion", deletion},
          {"adversarial", adversarial},
          {"multifunction", multifunction},
          {"sets_per_k", sets_per_k},
          {"max_distance", max_distance},
          {"min_failing", min_failing},
          {"floor", floor},
          {"test_budget", test_budget},
          {"max_tool_calls", max_tool_calls},
          {"max_targets", max_targets},
          {"corruption_client", corruption_client},
          {"budget_preset", budget_preset},
          {"logical_clock", logical_clock},
          {"hard_set_pct", hard_set_pct},
          {"x_metric", x_metric},
          {"y_metric", y_metric},
          {"grid_bins", grid_bins},
          {"llm_model", llm_model},
          {"llm_base_url", llm_base_url},
          {"llm_temperature", llm_temperature}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "config must be a JSON object");
  PipelineConfig c;
  const json known = c.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(Errc::InvalidArgument, "config: unknown key '" + key + "'");
  }
  try {
    std::string path;
    if (j.contains("repo")) c.repo = j.at("repo").get<std::string>();
    if (j.contains("store")) c.store = j.at("store").get<std::string>();
    read_field(j, "test_command", c.test_command);
    read_field(j, "seed", c.seed);
    read_field(j, "jobs", c.jobs);
    read_field(j, "cap_seconds", c.cap_seconds);
    read_field(j, "deletion", c.deletion);
    read_field(j, "adversarial", c.adversarial);
    read_field(j, "multifunction", c.multifunction);
    read_field(j, "sets_per_k", c.sets_per_k);
    read_field(j, "max_distance", c.max_distance);
    read_field(j, "min_failing", c.min_failing);
    read_field(j, "floor", c.floor);
    read_field(j, "test_budget", c.test_budget);
    read_field(j, "max_tool_calls", c.max_tool_calls);
    read_field(j, "max_targets", c.max_targets);
    read_field(j, "corruption_client", c.corruption_client);
    read_field(j, "budget_preset", c.budget_preset);
    read_field(j, "logical_clock", c.logical_clock);
    read_field(j, "hard_set_pct", c.hard_set_pct);
    read_field(j, "x_metric", c.x_metric);
    read_field(j, "y_metric", c.y_metric);
    read_field(j, "grid_bins", c.grid_bins);
    read_field(j, "llm_model", c.llm_model);
    read_field(j, "llm_base_url", c.llm_base_url);
    read_field(j, "llm_temperature", c.llm_temperature);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::PathNotFound, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, "config " + path.string() + ": " + e.what());
  }
  PipelineConfig c = from_json(j);
  // Relative paths are relative to the config file.
  const fs::path base = path.parent_path();
  if (!c.repo.empty() && c.repo.is_relative()) c.repo = base / c.repo;
  if (c.store.is_relative() && j.contains("store")) c.store = base / c.store;
  return c;
}

LlmConfig PipelineConfig::llm() const {
  LlmConfig l = LlmConfig::from_env(llm_model);
  if (!llm_base_url.empty()) l.base_url = llm_base_url;
  l.temperature = llm_temperature;
  return l;
}

json baseline_to_json(const SuiteReport& report) {
  json outcomes = json::array();
  for (const auto& o : report.outcomes) outcomes.push_back({{"test_id", o.test_id}, {"status", to_string(o.status)}});
  return {{"exit", to_string(report.exit)}, {"tests", report.outcomes.size()}, {"outcomes", outcomes}};
}

namespace {

void require_repo(const PipelineConfig& config) {
  if (config.repo.empty()) throw Error(Errc::InvalidArgument, "config: repo is required");
}

}  // namespace

IngestSummary cmd_ingest(const PipelineConfig& config) {
  config.validate();
  require_repo(config);
  const Ingested in = ingest_and_write(config);
  return {in.repo.units.size(), in.graph.edges().size()};
}

GenerationReport cmd_generate(const PipelineConfig& config) {
  config.validate();
  require_repo(config);
  const StorePaths store{config.store};
  fs::create_directories(store.root);
  StoreLock lock(store.lock());
  const Ingested in = ingest_and_write(config);
  const HarnessOptions harness = harness_of(config);
  const SuiteReport base = baseline(in.repo, harness);
  write_json(store.root / "baseline.json", baseline_to_json(base));

  GenerationConfig gc;
  gc.deletion = config.deletion;
  gc.adversarial = config.adversarial;
  gc.multifunction = config.multifunction;
  gc.sets_per_k = config.sets_per_k;
  gc.max_distance = config.max_distance;
  gc.min_failing = config.min_failing;
  gc.floor = config.floor;
  gc.test_budget = config.test_budget;
  gc.max_tool_calls = config.max_tool_calls;
  gc.max_targets = config.max_targets;
  gc.seed = config.seed;
  gc.jobs = config.jobs;
  gc.harness = harness;
  if (config.corruption_client == "llm") {
    const LlmConfig llm = config.llm();
    const ChatTransport transport = http_transport(llm);
    gc.client_factory = [llm, transport](std::uint64_t) -> std::unique_ptr<CorruptionClient> {
      return std::make_unique<LlmCorruptionClient>(llm, transport);
    };
  }
  GenerationReport report = generate_tasks(in.repo, in.graph, base, in.records, gc);

  fs::remove_all(store.tasks());
  fs::create_directories(store.tasks());
  for (const auto& t : report.tasks) write_task(store.tasks() / (t.task_id + ".json"), t);
  write_json(store.root / "generation_report.json", report.to_json());
  write_json(store.root / "config.json", config.to_json());
  fs::remove_all(store.repo());
  copy_source_tree(config.repo, store.repo());
  if (report.tasks.empty()) throw Error(Errc::NoTasksGenerated, "no candidate survived validation");
  return report;
}

namespace {

struct StoreEnvironment {
  std::vector<TaskInstance> tasks;
  std::shared_ptr<const EvalEnvironment> env;
};

StoreEnvironment open_store(const PipelineConfig& config) {
  const StorePaths store{config.store};
  if (!fs::is_directory(store.tasks())) throw Error(Errc::PathNotFound, "no task store at " + store.root.string());
  StoreEnvironment s;
  s.tasks = load_task_store(store.root);
  const Repository repo = ingest_repository(store.repo(), test_command_of(config));
  const HarnessOptions harness = harness_of(config);
  s.env = make_environment(repo, baseline(repo, harness), harness, true);
  return s;
}

}  // namespace

ValidationSummary cmd_validate(const PipelineConfig& config) {
  config.validate();
  const StoreEnvironment s = open_store(config);
  ValidationSummary summary;
  summary.checked = s.tasks.size();
  std::vector<char> bad(s.tasks.size(), 0);
  parallel_for(s.tasks.size(), config.jobs, [&](std::size_t i) {
    const TaskInstance& t = s.tasks[i];
    const ValidationResult r = validate_task(s.env->repo, t.corruptions, s.env->baseline, config.min_failing,
                                             s.env->harness);
    bad[i] = (!r.accepted || r.failing_tests != t.failing_tests) ? 1 : 0;
  });
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (bad[i]) summary.mismatched.push_back(s.tasks[i].task_id);
  }
  return summary;
}

bool TaskFilter::matches(const TaskInstance& t) const {
  if (mode && t.mode != *mode) return false;
  if (!corruption_counts.empty() && !corruption_counts.count(static_cast<int>(t.corruptions.size()))) return false;
  if (!task_ids.empty() && !task_ids.count(t.task_id)) return false;
  return true;
}

std::string agent_label(const std::string& agent_spec, const std::string& preset) {
  std::string label;
  for (char c : agent_spec + "@" + preset) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' || c == '@';
    label.push_back(safe ? c : '_');
  }
  return label;
}

namespace {

struct AgentSpec {
  std::string kind;
  double competence = 1.0;
  std::uint64_t seed = 0;
  std::string model;
};

AgentSpec parse_agent_spec(const std::string& spec) {
  AgentSpec a;
  const auto colon = spec.find(':');
  a.kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (a.kind == "oracle" || a.kind == "null") {
    if (!rest.empty()) throw Error(Errc::UnknownAgent, "agent '" + a.kind + "' takes no parameters");
    return a;
  }
  if (a.kind == "competence") {
    try {
      const auto second = rest.find(':');
      a.competence = std::stod(rest.substr(0, second));
      if (second != std::string::npos) a.seed = std::stoull(rest.substr(second + 1));
    } catch (const std::exception&) {
      throw Error(Errc::UnknownAgent, "expected competence:<c>[:<seed>], got '" + spec + "'");
    }
    if (a.competence < 0.0 || a.competence > 1.0) throw Error(Errc::UnknownAgent, "competence must lie in [0, 1]");
    return a;
  }
  if (a.kind == "llm") {
    if (rest.empty()) throw Error(Errc::UnknownAgent, "expected llm:<model>");
    a.model = rest;
    return a;
  }
  throw Error(Errc::UnknownAgent, "unknown agent '" + spec + "'");
}

}  // namespace

EvaluationSummary cmd_evaluate(const PipelineConfig& config, const std::string& agent_spec, const TaskFilter& filter) {
  config.validate();
  const AgentSpec spec = parse_agent_spec(agent_spec);
  const StoreEnvironment s = open_store(config);
  const BudgetConfig budget = budget_preset(config.budget_preset);
  std::set<std::string> hard;
  if (filter.hard_only) {
    for (const auto& t : select_hard_set(s.tasks, config.x_metric, config.y_metric, config.hard_set_pct)) {
      hard.insert(t.task_id);
    }
  }
  std::vector<const TaskInstance*> selected;
  for (const auto& t : s.tasks) {
    if (filter.matches(t) && (!filter.hard_only || hard.count(t.task_id))) selected.push_back(&t);
  }
  std::optional<ChatTransport> transport;
  LlmConfig llm;
  if (spec.kind == "llm") {
    llm = config.llm();
    llm.model = spec.model;
    transport = http_transport(llm);
  }

  EvaluationSummary summary;
  summary.label = agent_label(agent_spec, config.budget_preset);
  const fs::path dir = StorePaths{config.store}.trajectories() / summary.label;
  std::atomic<std::size_t> run{0}, skipped{0}, solved{0}, failed{0};
  parallel_for(selected.size(), config.jobs, [&](std::size_t i) {
    const TaskInstance& task = *selected[i];
    const fs::path out = dir / (task.task_id + ".jsonl");
    if (fs::exists(out)) {
      ++skipped;
      return;
    }
    std::unique_ptr<AgentClient> agent;
    if (spec.kind == "oracle") {
      agent = std::make_unique<OracleAgent>(task, s.env->repo);
    } else if (spec.kind == "null") {
      agent = std::make_unique<NullAgent>();
    } else if (spec.kind == "competence") {
      agent = std::make_unique<CompetenceGradedAgent>(task, s.env->repo, spec.competence, spec.seed);
    } else {
      agent = std::make_unique<LlmAgent>(llm, *transport);
    }
    SessionOptions so;
    so.label = summary.label;
    so.logical_clock = config.logical_clock;
    Session session(summary.label + "/" + task.task_id, task, s.env, budget, so);
    const Trajectory& t = run_agent(session, *agent);
    write_trajectory(out, t);
    ++run;
    if (t.score == 1) ++solved;
    if (t.state == SessionState::Failed) ++failed;
  });
  summary.run = run;
  summary.skipped = skipped;
  summary.solved = solved;
  summary.failed = failed;
  return summary;
}

namespace {

std::string num(double v) { return format_double(v); }

void write_results_csv(const fs::path& path, const std::vector<ResultRow>& rows, const std::string& x,
                       const std::string& y) {
  CsvWriter w(path);
  w.row({"task_id", "label", "mode", "score", "solved_at_attempt", "corruptions", "z_" + x, "z_" + y, "pct_" + x,
         "pct_" + y, "info_calls", "submissions"});
  for (const auto& r : rows) {
    w.row({r.task_id, r.label, std::string(to_string(r.mode)), std::to_string(r.score),
           r.solved_at_attempt ? std::to_string(*r.solved_at_attempt) : "NA", std::to_string(r.corruption_count),
           num(r.predictor(x)), num(r.predictor(y)), num(r.pct.at(x)), num(r.pct.at(y)), std::to_string(r.info_calls),
           std::to_string(r.submissions)});
  }
}

json fit_or_error(const std::vector<ResultRow>& rows, const std::vector<std::string>& predictors,
                  std::optional<LogisticFit>& fit) {
  try {
    fit = fit_logistic(rows, predictors);
    return fit->to_json();
  } catch (const Error& e) {
    return {{"n", rows.size()}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  }
}

}  // namespace

std::vector<fs::path> cmd_report(const PipelineConfig& config, const ReportOptions& options) {
  config.validate();
  const StorePaths store{config.store};
  std::vector<Trajectory> trajectories;
  if (fs::is_directory(store.trajectories())) trajectories = load_trajectories(store.trajectories());
  if (trajectories.empty()) throw Error(Errc::NoResults, "no trajectories under " + store.trajectories().string());
  const std::vector<TaskInstance> tasks = load_task_store(store.root);
  const std::vector<ResultRow> rows = build_results(tasks, trajectories);
  if (rows.empty()) throw Error(Errc::NoResults, "no trajectory matches a stored task");
  const fs::path out = store.report();
  fs::create_directories(out);
  std::vector<fs::path> written;
  const std::string& x = config.x_metric;
  const std::string& y = config.y_metric;

  std::map<std::string, std::vector<ResultRow>> by_label;
  std::map<std::string, std::vector<Trajectory>> traj_by_label;
  for (const auto& r : rows) by_label[r.label].push_back(r);
  for (const auto& t : trajectories) traj_by_label[t.label].push_back(t);

  write_results_csv(out / "results.csv", rows, x, y);
  written.push_back(out / "results.csv");

  json fits = json::array();
  std::optional<LogisticFit> pooled;
  json pooled_json = fit_or_error(rows, {x, y}, pooled);
  pooled_json["label"] = "all";
  fits.push_back(pooled_json);
  for (const auto& [label, label_rows] : by_label) {
    std::optional<LogisticFit> f;
    json j = fit_or_error(label_rows, {x, y}, f);
    j["label"] = label;
    fits.push_back(std::move(j));
  }
  write_json(out / "fit.json", {{"predictors", {x, y}}, {"fits", fits}});
  written.push_back(out / "fit.json");

  {
    CsvWriter w(out / "passn.csv");
    w.row({"label", "n", "rate"});
    for (const auto& [label, ts] : traj_by_label) {
      const auto curve = passn_curve(ts);
      for (std::size_t n = 0; n < curve.size(); ++n) w.row({label, std::to_string(n + 1), num(curve[n])});
    }
    written.push_back(out / "passn.csv");
  }
  {
    CsvWriter w(out / "telemetry.csv");
    w.row({"label", "mode", "trajectories", "measure", "mean"});
    for (const auto& t : telemetry_summary(trajectories)) {
      const std::string n = std::to_string(t.n);
      w.row({t.label, t.mode, n, "info_calls", num(t.mean_info_calls)});
      w.row({t.label, t.mode, n, "submissions", num(t.mean_submissions)});
      for (const auto& [tool, mean] : t.mean_tool_calls) w.row({t.label, t.mode, n, "tool:" + tool, num(mean)});
    }
    written.push_back(out / "telemetry.csv");
  }
  {
    std::vector<ResultRow> grid_rows = rows;
    if (options.hard_only) {
      std::set<std::string> hard;
      for (const auto& t : select_hard_set(tasks, x, y, config.hard_set_pct)) hard.insert(t.task_id);
      std::erase_if(grid_rows, [&](const ResultRow& r) { return !hard.count(r.task_id); });
    }
    LogisticFit flat;
    flat.coefficients = {{"intercept"}, {x}, {y}};
    const LogisticFit& fit = pooled ? *pooled : flat;
    const DifficultyGrid grid = difficulty_grid(grid_rows, x, y, config.grid_bins, fit);
    CsvWriter w(out / "grid.csv");
    w.row({"kind", "level", "x", "y", "count", "solved", "rate"});
    for (const auto& c : grid.cells) {
      w.row({"cell", "", num(c.x_center), num(c.y_center), std::to_string(c.count), std::to_string(c.solved),
             num(c.rate())});
    }
    for (const auto& b : grid.boundary) w.row({"boundary", b.level, num(b.x), num(b.y), "", "", ""});
    written.push_back(out / "grid.csv");
  }
  {
    CsvWriter w(out / "scaling.csv");
    w.row({"label", "corruptions", "n", "rate", "ci_lo", "ci_hi"});
    for (const auto& [label, label_rows] : by_label) {
      for (const auto& p : success_by_corruptions(label_rows, config.seed)) {
        w.row({label, std::to_string(p.k), std::to_string(p.n), num(p.rate), num(p.ci.lo), num(p.ci.hi)});
      }
    }
    written.push_back(out / "scaling.csv");
  }
  {
    CsvWriter w(out / "distributions.csv");
    w.row({"label", "metric", "n_solved", "n_unsolved", "u", "p", "r", "exact", "cohens_d"});
    for (const auto& [label, label_rows] : by_label) {
      for (const auto& metric : {x, y}) {
        std::vector<double> solved, unsolved;
        for (const auto& r : label_rows) (r.score == 1 ? solved : unsolved).push_back(r.predictor(metric));
        if (solved.empty() || unsolved.empty()) {
          w.row({label, metric, std::to_string(solved.size()), std::to_string(unsolved.size()), "NA", "NA", "NA",
                 "NA", "NA"});
          continue;
        }
        const MannWhitney mw = mann_whitney(solved, unsolved);
        std::string d = "NA";
        try {
          d = num(cohens_d(solved, unsolved));
        } catch (const Error&) {
        }
        w.row({label, metric, std::to_string(solved.size()), std::to_string(unsolved.size()), num(mw.u), num(mw.p),
               num(mw.r), mw.exact ? "1" : "0", d});
      }
    }
    written.push_back(out / "distributions.csv");
  }
  {
    json ids = json::array();
    for (const auto& t : select_hard_set(tasks, x, y, config.hard_set_pct)) ids.push_back(t.task_id);
    write_json(out / "hard_set.json", {{"pct", config.hard_set_pct}, {"complexity", x}, {"centrality", y}, {"task_ids", ids}});
    written.push_back(out / "hard_set.json");
  }
  return written;
}

}  // namespace breakpoint
