#include "breakpoint/trajectory.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace breakpoint {

namespace {

struct Preset {
  const char* name;
  BudgetConfig budget;
};

constexpr Preset kPresets[] = {
    {"small", {4, 1}},
    {"medium", {8, 2}},
    {"default", {16, 4}},
    {"xl", {32, 8}},
};

}  // namespace

BudgetConfig budget_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    const std::string slash = std::to_string(p.budget.max_tool_uses) + "/" + std::to_string(p.budget.max_attempts);
    if (name == p.name || name == slash) return p.budget;
  }
  throw Error(Errc::InvalidArgument, "unknown budget preset '" + std::string(name) + "'");
}

std::vector<std::string> budget_preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Active:
      return "active";
    case SessionState::Exhausted:
      return "exhausted";
    case SessionState::Solved:
      return "solved";
    case SessionState::Failed:
      return "failed";
  }
  return "?";
}

SessionState session_state_from_string(std::string_view s) {
  if (s == "active") return SessionState::Active;
  if (s == "exhausted") return SessionState::Exhausted;
  if (s == "solved") return SessionState::Solved;
  if (s == "failed") return SessionState::Failed;
  throw Error(Errc::SchemaError, "unknown session state '" + std::string(s) + "'");
}

bool is_info_tool(std::string_view tool) {
  return tool == "list_directory" || tool == "search_code" || tool == "read_file" ||
         tool == "list_file_functions" || tool == "read_function";
}

bool is_submission_tool(std::string_view tool) { return tool == "submit_attempt" || tool == "replace_function"; }

int Trajectory::info_calls() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const auto& e) { return e.kind == "info"; }));
}

std::map<std::string, int> Trajectory::tool_counts() const {
  std::map<std::string, int> out;
  for (const auto& e : events) {
    if (e.kind != "rejected") ++out[e.tool];
  }
  return out;
}

json Trajectory::summary() const {
  return {{"session_id", session_id},
          {"task_id", task_id},
          {"label", label},
          {"mode", to_string(mode)},
          {"budget", {{"max_tool_uses", budget.max_tool_uses}, {"max_attempts", budget.max_attempts}}},
          {"score", score},
          {"solved_at_attempt", solved_at_attempt ? json(*solved_at_attempt) : json(nullptr)},
          {"used_tools", used_tools},
          {"used_attempts", used_attempts},
          {"state", to_string(state)},
          {"reason", reason}};
}

std::string Trajectory::to_jsonl() const {
  std::string out;
  for (const auto& e : events) {
    json line = {{"seq", e.seq},   {"kind", e.kind},
                 {"tool", e.tool}, {"args_digest", e.args_digest},
                 {"result_digest", e.result_digest}, {"t", e.t},
                 {"args", e.args}};
    if (e.kind == "submission") {
      line["attempt"] = e.attempt;
      line["unit_id"] = e.unit_id;
      line["failing_count"] = e.failing_count;
      line["passed"] = e.passed;
    }
    out += line.dump();
    out += '\n';
  }
  out += summary().dump();
  out += '\n';
  return out;
}

Trajectory Trajectory::from_jsonl(std::string_view text) {
  std::vector<json> lines;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      const std::string_view line = text.substr(pos, eol - pos);
      if (!line.empty()) lines.push_back(json::parse(line));
      pos = eol + 1;
    }
    if (lines.empty()) throw Error(Errc::SchemaError, "empty trajectory");
    Trajectory t;
    const json& s = lines.back();
    t.session_id = s.at("session_id").get<std::string>();
    t.task_id = s.at("task_id").get<std::string>();
    t.label = s.at("label").get<std::string>();
    t.mode = task_mode_from_string(s.at("mode").get<std::string>());
    t.budget = {s.at("budget").at("max_tool_uses").get<int>(), s.at("budget").at("max_attempts").get<int>()};
    t.score = s.at("score").get<int>();
    if (!s.at("solved_at_attempt").is_null()) t.solved_at_attempt = s.at("solved_at_attempt").get<int>();
    t.used_tools = s.at("used_tools").get<int>();
    t.used_attempts = s.at("used_attempts").get<int>();
    t.state = session_state_from_string(s.at("state").get<std::string>());
    t.reason = s.value("reason", "");
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
      const json& l = lines[i];
      TrajectoryEvent e;
      e.seq = l.at("seq").get<int>();
      e.kind = l.at("kind").get<std::string>();
      e.tool = l.at("tool").get<std::string>();
      e.args_digest = l.at("args_digest").get<std::string>();
      e.result_digest = l.at("result_digest").get<std::string>();
      e.t = l.at("t").get<double>();
      e.args = l.value("args", json::object());
      if (e.kind == "submission") {
        e.attempt = l.at("attempt").get<int>();
        e.unit_id = l.at("unit_id").get<std::string>();
        e.failing_count = l.at("failing_count").get<int>();
        e.passed = l.at("passed").get<bool>();
        SubmissionRecord r;
        r.attempt = e.attempt;
        r.unit_id = e.unit_id;
        r.patch_digest = content_digest(e.args.value("code", ""));
        r.failing_count = e.failing_count;
        r.passed = e.passed;
        t.submissions.push_back(std::move(r));
      }
      t.events.push_back(std::move(e));
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("trajectory: ") + e.what());
  }
}

void write_trajectory(const fs::path& path, const Trajectory& t) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Written whole to a temporary name first so readers never see half a file.
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out << t.to_jsonl();
  }
  fs::rename(tmp, path);
}

Trajectory read_trajectory(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Trajectory::from_jsonl(ss.str());
}

std::vector<Trajectory> load_trajectories(const fs::path& dir) {
  std::vector<fs::path> paths;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") paths.push_back(e.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Trajectory> out;
  for (const auto& p : paths) out.push_back(read_trajectory(p));
  return out;
}

}  // namespace breakpoint
