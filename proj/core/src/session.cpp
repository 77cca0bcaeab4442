#include "breakpoint/session.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/prompts.hpp"
#include "breakpoint/python/lexer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace breakpoint {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string unit_name(std::string_view unit_id) {
  const auto [file, qualname] = split_unit_id(unit_id);
  std::string name = qualname.substr(qualname.rfind('.') == std::string::npos ? 0 : qualname.rfind('.') + 1);
  return name.substr(0, name.find('#'));
}

// Object reprs carry addresses that change from run to run.
std::string scrub(const std::string& message) {
  static const std::regex addr("0x[0-9a-fA-F]+");
  return std::regex_replace(message, addr, "0x?");
}

std::vector<std::string> significant(const std::string& text) {
  std::vector<std::string> out;
  try {
    const std::string flat = python::dedent(text);
    for (const auto& t : python::tokenize(flat)) {
      if (t.kind == python::TokenKind::Comment || t.kind == python::TokenKind::Nl) continue;
      out.emplace_back(t.text);
    }
  } catch (const SyntaxError&) {
    out = {text};
  }
  return out;
}

std::map<std::string, std::string> digest_test_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& rel : list_python_files(root)) {
    if (is_test_path(rel)) out[rel] = content_digest(slurp(root / rel));
  }
  return out;
}

const std::string& arg_string(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || !it->is_string()) {
    throw Error(Errc::InvalidArgument, std::string("missing string argument '") + key + "'");
  }
  return it->get_ref<const std::string&>();
}

json unit_index(std::string_view rel, const std::string& text) {
  json out = json::array();
  for (const auto& u : units_of_source(rel, text)) {
    std::string sig;
    try {
      sig = python::normalized_signature(u.text());
    } catch (const SyntaxError&) {
      sig = u.signature;
    }
    out.push_back({{"id", u.id}, {"kind", to_string(u.kind)}, {"signature", sig}, {"lines", {u.span.start, u.span.end}}});
  }
  return out;
}

}  // namespace

json SubmissionResult::to_json() const {
  return {{"attempt", attempt},
          {"unit_id", unit_id},
          {"passed", passed},
          {"failing_count", failing_tests.size()},
          {"failing_tests", failing_tests},
          {"messages", messages},
          {"diagnostics", diagnostics}};
}

std::shared_ptr<const EvalEnvironment> make_environment(const Repository& repo, const SuiteReport& baseline,
                                                        const HarnessOptions& harness, bool cache_suites) {
  auto env = std::make_shared<EvalEnvironment>();
  env->repo = repo;
  env->baseline = baseline;
  env->harness = harness;
  if (cache_suites) env->suite_cache = std::make_shared<SuiteCache>();
  return env;
}

Session::Session(std::string id, const TaskInstance& task, std::shared_ptr<const EvalEnvironment> env,
                 BudgetConfig budget, SessionOptions options)
    : id_(std::move(id)), task_(task), env_(std::move(env)), budget_(budget), options_(std::move(options)) {
  if (budget_.max_tool_uses < 1 || budget_.max_attempts < 1) {
    throw Error(Errc::InvalidArgument, "budgets must be at least 1");
  }
  try {
    sandbox_ = std::make_unique<Sandbox>(env_->repo.root);
    for (const auto& c : task_.corruptions) sandbox_->replace_unit(c.target, c.corrupted_body);
  } catch (const Error& e) {
    throw Error(Errc::SnapshotFailure, e.what());
  }
  test_digests_ = digest_test_files(env_->repo.root);
  trajectory_.session_id = id_;
  trajectory_.task_id = task_.task_id;
  trajectory_.label = options_.label;
  trajectory_.mode = task_.mode;
  trajectory_.budget = budget_;
  opened_ = std::chrono::steady_clock::now();
  last_activity_ = opened_;
}

Session::~Session() = default;

json Session::description() const {
  json d = {{"task_id", task_.task_id},
            {"mode", to_string(task_.mode)},
            {"repo", env_->repo.root.filename().string()},
            {"failing_count", task_.failing_tests.size()},
            {"failing_tests", task_.failing_tests}};
  if (task_.mode == TaskMode::Remove) d["target"] = task_.corruptions.front().target;
  return d;
}

std::string Session::system_prompt() const {
  std::string failing;
  for (const auto& t : task_.failing_tests) failing += "- " + t + "\n";
  std::map<std::string, std::string> slots = {
      {"repo_name", env_->repo.root.filename().string()},
      {"failing_count", std::to_string(task_.failing_tests.size())},
      {"failing_tests", failing},
      {"max_tool_uses", std::to_string(budget_.max_tool_uses)},
      {"max_attempts", std::to_string(budget_.max_attempts)}};
  if (task_.mode == TaskMode::Remove) {
    slots["target"] = task_.corruptions.front().target;
    return render_template(solver_remove_template(), slots);
  }
  return render_template(solver_discovery_template(), slots);
}

void Session::require_open() const {
  if (closed_ || state_ != SessionState::Active) {
    throw Error(Errc::SessionClosed, "session is " + std::string(closed_ ? "closed" : to_string(state_)));
  }
}

void Session::charge_tool() {
  if (used_tools_ >= budget_.max_tool_uses) {
    throw Error(Errc::BudgetExhausted, "tool budget of " + std::to_string(budget_.max_tool_uses) + " used up");
  }
}

fs::path Session::resolve(std::string_view path) const {
  std::string p(path);
  if (!p.empty() && p.front() == '/') throw Error(Errc::PathOutsideSandbox, p);
  const fs::path& root = sandbox_->root();
  const fs::path full = (root / p).lexically_normal();
  const fs::path rel = full.lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") throw Error(Errc::PathOutsideSandbox, p);
  if (fs::exists(full)) {
    const fs::path real = fs::canonical(full);
    const fs::path real_rel = real.lexically_relative(fs::canonical(root));
    if (real_rel.empty() || *real_rel.begin() == "..") throw Error(Errc::PathOutsideSandbox, p);
  }
  return full;
}

json Session::list_directory(std::string_view path) {
  require_open();
  charge_tool();
  const fs::path dir = resolve(path.empty() ? "." : path);
  if (!fs::exists(dir)) throw Error(Errc::NotFound, std::string(path));
  if (!fs::is_directory(dir)) throw Error(Errc::InvalidArgument, "not a directory: " + std::string(path));
  std::vector<std::pair<std::string, bool>> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.emplace_back(e.path().filename().string(), e.is_directory());
  std::sort(entries.begin(), entries.end());
  json list = json::array();
  for (const auto& [name, is_dir] : entries) list.push_back({{"name", name}, {"type", is_dir ? "dir" : "file"}});
  ++used_tools_;
  return {{"path", dir.lexically_relative(sandbox_->root()).generic_string()}, {"entries", list}};
}

json Session::search_code(const std::string& pattern, bool is_regex) {
  require_open();
  charge_tool();
  if (pattern.empty()) throw Error(Errc::InvalidPattern, "empty pattern");
  std::optional<std::regex> re;
  if (is_regex) {
    try {
      re.emplace(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(Errc::InvalidPattern, std::string("invalid regular expression: ") + e.what());
    }
  }
  json matches = json::array();
  bool truncated = false;
  for (const auto& rel : list_python_files(sandbox_->root())) {
    std::istringstream in(slurp(sandbox_->root() / rel));
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      const bool hit = re ? std::regex_search(line, *re) : line.find(pattern) != std::string::npos;
      if (!hit) continue;
      if (matches.size() >= env_->search_hit_limit) {
        truncated = true;
        break;
      }
      if (line.size() > 300) line.resize(300);
      matches.push_back({{"file", rel}, {"line", line_no}, {"text", line}});
    }
    if (truncated) break;
  }
  ++used_tools_;
  json out = {{"matches", matches}, {"truncated", truncated}};
  if (truncated) out["notice"] = "results truncated at " + std::to_string(env_->search_hit_limit) + " matches";
  return out;
}

json Session::read_file(std::string_view path) {
  require_open();
  charge_tool();
  const fs::path file = resolve(path);
  if (!fs::is_regular_file(file)) throw Error(Errc::NotFound, std::string(path));
  const std::string text = slurp(file);
  if (text.find('\0') != std::string::npos) throw Error(Errc::InvalidArgument, "binary file: " + std::string(path));
  const std::string rel = file.lexically_relative(sandbox_->root()).generic_string();
  json out = {{"path", rel}};
  if (text.size() <= env_->read_file_limit) {
    out["kind"] = "text";
    out["content"] = text;
  } else {
    out["kind"] = "index";
    out["size"] = text.size();
    try {
      out["functions"] = unit_index(rel, text);
    } catch (const SyntaxError&) {
      out["functions"] = json::array();
    }
    out["notice"] = "file exceeds " + std::to_string(env_->read_file_limit) + " characters; use read_function";
  }
  ++used_tools_;
  return out;
}

json Session::list_file_functions(std::string_view path) {
  require_open();
  charge_tool();
  const fs::path file = resolve(path);
  if (!fs::is_regular_file(file)) throw Error(Errc::NotFound, std::string(path));
  const std::string rel = file.lexically_relative(sandbox_->root()).generic_string();
  json functions;
  try {
    functions = unit_index(rel, slurp(file));
  } catch (const SyntaxError& e) {
    throw Error(Errc::InvalidArgument, std::string("file does not parse: ") + e.what());
  }
  ++used_tools_;
  return {{"path", rel}, {"functions", functions}};
}

json Session::read_function(std::string_view unit_id) {
  require_open();
  charge_tool();
  std::string file;
  try {
    file = split_unit_id(unit_id).first;
  } catch (const Error&) {
    throw Error(Errc::NotFound, std::string(unit_id));
  }
  const fs::path path = resolve(file);
  if (!fs::is_regular_file(path)) throw Error(Errc::NotFound, std::string(unit_id));
  std::vector<FunctionUnit> units;
  try {
    units = units_of_source(file, slurp(path));
  } catch (const SyntaxError&) {
    throw Error(Errc::NotFound, std::string(unit_id));
  }
  for (const auto& u : units) {
    if (u.id == unit_id) {
      ++used_tools_;
      return {{"unit_id", u.id}, {"text", u.text()}};
    }
  }
  throw Error(Errc::NotFound, std::string(unit_id));
}

SubmissionResult Session::submit_attempt(const std::string& code) {
  require_open();
  if (task_.mode != TaskMode::Remove) throw Error(Errc::WrongMode, "submit_attempt is a remove-mode tool");
  if (used_attempts_ >= budget_.max_attempts) throw Error(Errc::AttemptsExhausted, "no attempts left");
  return run_submission(task_.corruptions.front().target, code);
}

SubmissionResult Session::replace_function(std::string_view unit_id, const std::string& code) {
  require_open();
  if (task_.mode != TaskMode::Discovery) throw Error(Errc::WrongMode, "replace_function is a discovery-mode tool");
  if (used_attempts_ >= budget_.max_attempts) throw Error(Errc::AttemptsExhausted, "no attempts left");
  std::string file;
  try {
    file = split_unit_id(unit_id).first;
    const fs::path path = resolve(file);
    if (!fs::is_regular_file(path)) throw Error(Errc::UnknownUnit, std::string(unit_id));
    const auto units = units_of_source(file, slurp(path));
    const bool present = std::any_of(units.begin(), units.end(), [&](const auto& u) { return u.id == unit_id; });
    if (!present) throw Error(Errc::UnknownUnit, std::string(unit_id));
  } catch (const SyntaxError&) {
    throw Error(Errc::UnknownUnit, std::string(unit_id));
  } catch (const Error& e) {
    if (e.code() == Errc::PathOutsideSandbox) throw;
    throw Error(Errc::UnknownUnit, std::string(unit_id));
  }
  return run_submission(std::string(unit_id), code);
}

SubmissionResult Session::run_submission(const std::string& unit_id, const std::string& code) {
  SubmissionResult r;
  r.attempt = ++used_attempts_;
  r.unit_id = unit_id;
  const std::string problem = python::validate_unit_source(code, unit_name(unit_id));
  if (!problem.empty()) {
    r.diagnostics = "unparseable submission: " + problem;
  } else {
    sandbox_->replace_unit(unit_id, code);
    edits_[unit_id].push_back(code);
    const SuiteReport after = run_suite_cached(sandbox_->root(), env_->repo.test_command, env_->harness, env_->suite_cache.get());
    r.failing_tests = failing_diff(env_->baseline, after);
    for (const auto& id : r.failing_tests) {
      const TestOutcome* t = after.find(id);
      r.messages[id] = t == nullptr ? "not collected" : scrub(t->message);
    }
    if (after.exit != SuiteExit::Completed) r.diagnostics = "test suite " + std::string(to_string(after.exit));
    r.passed = after.exit == SuiteExit::Completed && r.failing_tests.empty();
  }
  last_submission_ = r;
  if (r.passed) {
    state_ = SessionState::Solved;
    if (!first_pass_) first_pass_ = r.attempt;
  } else if (used_attempts_ >= budget_.max_attempts) {
    state_ = SessionState::Exhausted;
  }
  return r;
}

InvokeResult Session::invoke(std::string_view tool, const json& args_in) {
  const json args = args_in.is_object() ? args_in : json::object();
  InvokeResult out;
  std::optional<SubmissionResult> submission;
  bool rejected = false;
  last_activity_ = std::chrono::steady_clock::now();
  try {
    if (tool == "list_directory") {
      out.result = list_directory(args.contains("path") ? arg_string(args, "path") : std::string("."));
    } else if (tool == "search_code") {
      bool is_regex = false;
      if (args.contains("is_regex")) {
        if (!args["is_regex"].is_boolean()) throw Error(Errc::InvalidArgument, "is_regex must be a boolean");
        is_regex = args["is_regex"].get<bool>();
      }
      out.result = search_code(arg_string(args, "pattern"), is_regex);
    } else if (tool == "read_file") {
      out.result = read_file(arg_string(args, "path"));
    } else if (tool == "list_file_functions") {
      out.result = list_file_functions(arg_string(args, "path"));
    } else if (tool == "read_function") {
      out.result = read_function(arg_string(args, "unit_id"));
    } else if (tool == "submit_attempt") {
      if (task_.mode == TaskMode::Remove && args.contains("unit_id") &&
          arg_string(args, "unit_id") != task_.corruptions.front().target) {
        throw Error(Errc::InvalidArgument, "only the target function may be modified in remove mode");
      }
      submission = submit_attempt(arg_string(args, "code"));
    } else if (tool == "replace_function") {
      submission = replace_function(arg_string(args, "unit_id"), arg_string(args, "code"));
    } else {
      throw Error(Errc::InvalidArgument, "unknown tool '" + std::string(tool) + "'");
    }
  } catch (const Error& e) {
    rejected = true;
    out.error = e.code();
    out.result = {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
  }
  if (submission) {
    out.result = submission->to_json();
    if (!submission->passed && submission->failing_tests.empty() && !submission->diagnostics.empty() &&
        submission->diagnostics.rfind("unparseable", 0) == 0) {
      out.error = Errc::UnparseableBody;
    }
  }
  record(tool, args, out.result, rejected, submission ? &*submission : nullptr);
  return out;
}

void Session::record(std::string_view tool, const json& args, const json& result, bool rejected,
                     const SubmissionResult* submission) {
  TrajectoryEvent e;
  e.seq = static_cast<int>(trajectory_.events.size()) + 1;
  e.tool = std::string(tool);
  e.kind = rejected ? "rejected" : (submission != nullptr ? "submission" : "info");
  e.args = args;
  e.args_digest = content_digest(args.dump());
  e.result_digest = content_digest(result.dump());
  e.t = options_.logical_clock
            ? static_cast<double>(e.seq)
            : std::chrono::duration<double>(std::chrono::steady_clock::now() - opened_).count();
  if (submission != nullptr) {
    const bool ran = submission->diagnostics.rfind("unparseable", 0) != 0;
    e.attempt = submission->attempt;
    e.unit_id = submission->unit_id;
    e.failing_count = ran ? static_cast<int>(submission->failing_tests.size()) : -1;
    e.passed = submission->passed;
    SubmissionRecord rec;
    rec.attempt = submission->attempt;
    rec.unit_id = submission->unit_id;
    rec.patch_digest = content_digest(args.value("code", ""));
    rec.failing_count = e.failing_count;
    rec.passed = submission->passed;
    trajectory_.submissions.push_back(std::move(rec));
  }
  trajectory_.events.push_back(std::move(e));
  trajectory_.used_tools = used_tools_;
  trajectory_.used_attempts = used_attempts_;
  trajectory_.state = state_;
}

bool Session::test_files_modified() const { return digest_test_files(sandbox_->root()) != test_digests_; }

bool Session::target_modified() const {
  for (const auto& c : task_.corruptions) {
    const auto [file, qualname] = split_unit_id(c.target);
    std::vector<FunctionUnit> units;
    try {
      units = units_of_source(file, slurp(sandbox_->root() / file));
    } catch (const SyntaxError&) {
      continue;
    }
    for (const auto& u : units) {
      if (u.id == c.target && significant(u.text()) != significant(c.corrupted_body)) return true;
    }
  }
  return false;
}

int Session::score() const {
  if (!last_submission_ || !last_submission_->passed) return 0;
  if (test_files_modified()) return 0;
  if (task_.mode == TaskMode::Discovery && !target_modified()) return 0;
  return 1;
}

const Trajectory& Session::close(std::string reason) {
  if (closed_) return trajectory_;
  trajectory_.score = score();
  trajectory_.solved_at_attempt = trajectory_.score == 1 ? first_pass_ : std::nullopt;
  trajectory_.used_tools = used_tools_;
  trajectory_.used_attempts = used_attempts_;
  trajectory_.state = state_;
  trajectory_.reason = std::move(reason);
  closed_ = true;
  return trajectory_;
}

void Session::fail(const std::string& reason) {
  if (closed_) return;
  state_ = SessionState::Failed;
  close(reason);
}

}  // namespace breakpoint
