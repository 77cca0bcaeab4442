#include "breakpoint/task.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace breakpoint {

std::string_view to_string(CorruptionMethod m) {
  return m == CorruptionMethod::Deletion ? "deletion" : "adversarial";
}

std::string_view to_string(TaskMode m) { return m == TaskMode::Remove ? "remove" : "discovery"; }

CorruptionMethod corruption_method_from_string(std::string_view s) {
  if (s == "deletion") return CorruptionMethod::Deletion;
  if (s == "adversarial") return CorruptionMethod::Adversarial;
  throw Error(Errc::SchemaError, "unknown corruption method '" + std::string(s) + "'");
}

TaskMode task_mode_from_string(std::string_view s) {
  if (s == "remove") return TaskMode::Remove;
  if (s == "discovery") return TaskMode::Discovery;
  throw Error(Errc::SchemaError, "unknown task mode '" + std::string(s) + "'");
}

std::vector<std::string> TaskInstance::targets() const {
  std::vector<std::string> out;
  for (const auto& c : corruptions) out.push_back(c.target);
  return out;
}

double TaskInstance::max_percentile(std::string_view metric) const {
  double best = 0.0;
  for (const auto& c : corruptions) {
    auto it = metrics.find(c.target);
    if (it == metrics.end() || it->second.normalized.percentile.empty()) continue;
    best = std::max(best, it->second.normalized.pct(metric));
  }
  return best;
}

std::string compute_task_id(std::string_view commit, TaskMode mode, const std::vector<Corruption>& corruptions) {
  std::string material(commit);
  material += '\0';
  material += to_string(mode);
  for (const auto& c : corruptions) {
    material += '\0';
    material += c.target;
    material += '\0';
    material += c.corrupted_body;
  }
  return "bp-" + sha256_hex(material).substr(0, 16);
}

json to_json(const MetricsRecord& r) {
  json j = json::object();
  for (const auto& name : metric_names()) j[name] = metric_value(r, name);
  // Integer columns stay integers in the document.
  j["loc"] = r.loc;
  j["cyclomatic"] = r.cyclomatic;
  j["nesting_depth"] = r.nesting_depth;
  j["in_degree"] = r.in_degree;
  j["out_degree"] = r.out_degree;
  j["total_degree"] = r.total_degree;
  return j;
}

MetricsRecord metrics_record_from_json(const std::string& unit, const json& j) {
  MetricsRecord r;
  r.unit = unit;
  r.loc = j.at("loc").get<int>();
  r.cyclomatic = j.at("cyclomatic").get<int>();
  r.halstead_difficulty = j.at("halstead_difficulty").get<double>();
  r.halstead_volume = j.at("halstead_volume").get<double>();
  r.nesting_depth = j.at("nesting_depth").get<int>();
  r.in_degree = j.at("in_degree").get<int>();
  r.out_degree = j.at("out_degree").get<int>();
  r.total_degree = j.at("total_degree").get<int>();
  r.pagerank = j.at("pagerank").get<double>();
  r.harmonic = j.at("harmonic").get<double>();
  r.harmonic_in = j.at("harmonic_in").get<double>();
  r.distance_discount = j.at("distance_discount").get<double>();
  r.betweenness = j.at("betweenness").get<double>();
  return r;
}

json to_json(const Corruption& c) {
  return {{"target", c.target},
          {"method", to_string(c.method)},
          {"corrupted_body", c.corrupted_body},
          {"original_digest", c.original_digest}};
}

json to_json(const TaskInstance& t) {
  json corruptions = json::array();
  for (const auto& c : t.corruptions) corruptions.push_back(to_json(c));
  json metrics = json::object();
  for (const auto& [unit, m] : t.metrics) {
    json z = json::object();
    json pct = json::object();
    const auto& names = metric_names();
    for (std::size_t i = 0; i < names.size() && i < m.normalized.z.size(); ++i) {
      z[names[i]] = m.normalized.z[i];
      pct[names[i]] = m.normalized.percentile[i];
    }
    metrics[unit] = {{"raw", to_json(m.raw)}, {"zscore", z}, {"percentile", pct}};
  }
  return {{"schema_version", 1},
          {"task_id", t.task_id},
          {"repo_ref", {{"source", t.repo_ref.source}, {"commit", t.repo_ref.commit}}},
          {"mode", to_string(t.mode)},
          {"corruptions", corruptions},
          {"failing_tests", t.failing_tests},
          {"metrics", metrics},
          {"generator", {{"version", t.generator_version}, {"seed", t.seed}}}};
}

Corruption corruption_from_json(const json& j) {
  Corruption c;
  c.target = j.at("target").get<std::string>();
  c.method = corruption_method_from_string(j.at("method").get<std::string>());
  c.corrupted_body = j.at("corrupted_body").get<std::string>();
  c.original_digest = j.at("original_digest").get<std::string>();
  return c;
}

TaskInstance task_from_json(const json& j) {
  try {
    if (j.value("schema_version", 1) != 1) throw Error(Errc::SchemaError, "unsupported task schema_version");
    TaskInstance t;
    t.task_id = j.at("task_id").get<std::string>();
    t.repo_ref.source = j.at("repo_ref").at("source").get<std::string>();
    t.repo_ref.commit = j.at("repo_ref").at("commit").get<std::string>();
    t.mode = task_mode_from_string(j.at("mode").get<std::string>());
    for (const auto& c : j.at("corruptions")) t.corruptions.push_back(corruption_from_json(c));
    for (const auto& id : j.at("failing_tests")) t.failing_tests.insert(id.get<std::string>());
    for (const auto& [unit, m] : j.at("metrics").items()) {
      TargetMetrics tm;
      tm.raw = metrics_record_from_json(unit, m.at("raw"));
      tm.normalized.unit = unit;
      for (const auto& name : metric_names()) {
        tm.normalized.z.push_back(m.at("zscore").at(name).get<double>());
        tm.normalized.percentile.push_back(m.at("percentile").at(name).get<double>());
      }
      t.metrics.emplace(unit, std::move(tm));
    }
    t.generator_version = j.at("generator").at("version").get<std::string>();
    t.seed = j.at("generator").at("seed").get<std::uint64_t>();
    if (t.corruptions.empty()) throw Error(Errc::SchemaError, "task has no corruptions");
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("task.json: ") + e.what());
  }
}

void write_task(const fs::path& path, const TaskInstance& task) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << to_json(task).dump(2) << '\n';
}

TaskInstance read_task(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return task_from_json(j);
}

std::vector<TaskInstance> load_task_store(const fs::path& store) {
  const fs::path dir = store / "tasks";
  std::vector<TaskInstance> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(read_task(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  return out;
}

std::string check_task_invariants(const TaskInstance& task, int min_failing, const CallGraph* graph,
                                  std::size_t max_distance) {
  if (task.corruptions.empty()) return "no corruptions";
  if (static_cast<int>(task.failing_tests.size()) < min_failing) return "too few failing tests";
  if (task.mode == TaskMode::Remove) {
    if (task.corruptions.size() != 1) return "remove-mode task with several corruptions";
    if (task.corruptions.front().method != CorruptionMethod::Deletion) return "remove-mode task not a deletion";
  } else {
    for (const auto& c : task.corruptions) {
      if (c.method != CorruptionMethod::Adversarial) return "discovery-mode task with a deletion";
    }
  }
  if (graph != nullptr && task.corruptions.size() > 1) {
    for (std::size_t i = 0; i < task.corruptions.size(); ++i) {
      for (std::size_t j = i + 1; j < task.corruptions.size(); ++j) {
        const auto d = chain_distance(*graph, task.corruptions[i].target, task.corruptions[j].target);
        if (!d || *d > max_distance) return "targets too far apart on the call graph";
      }
    }
  }
  return {};
}

const FunctionUnit* find_by_digest(const Repository& repo, std::string_view digest) {
  for (const auto& u : repo.units) {
    if (content_digest(u.text()) == digest) return &u;
  }
  return nullptr;
}

}  // namespace breakpoint
