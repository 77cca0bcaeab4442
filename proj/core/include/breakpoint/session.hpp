#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/error.hpp"
#include "breakpoint/harness.hpp"
#include "breakpoint/repo_model.hpp"
#include "breakpoint/task.hpp"
#include "breakpoint/trajectory.hpp"

namespace breakpoint {

/// What every session of one task store shares: the pristine repository and
/// its baseline run. Immutable once built.
struct EvalEnvironment {
  Repository repo;
  SuiteReport baseline;
  HarnessOptions harness;
  std::size_t read_file_limit = 10000;  // characters; larger files come back as a unit index
  std::size_t search_hit_limit = 200;
  std::shared_ptr<SuiteCache> suite_cache;  // optional
};

struct SessionOptions {
  std::string label;
  bool logical_clock = false;  // event times are their sequence numbers
};

struct SubmissionResult {
  int attempt = 0;
  std::string unit_id;
  bool passed = false;
  std::set<std::string> failing_tests;
  std::map<std::string, std::string> messages;  // failing test -> first message line
  std::string diagnostics;                      // parse error or suite problem
  nlohmann::json to_json() const;
};

/// Outcome of one dispatched tool call.
struct InvokeResult {
  nlohmann::json result;  // {"error": {code, message}} when rejected
  std::optional<Errc> error;
};

/// One attempt at a task inside a private sandbox. Not thread-safe: callers
/// serialize access.
class Session {
 public:
  Session(std::string id, const TaskInstance& task, std::shared_ptr<const EvalEnvironment> env,
          BudgetConfig budget, SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const TaskInstance& task() const { return task_; }
  TaskMode mode() const { return task_.mode; }
  const BudgetConfig& budget() const { return budget_; }
  int used_tools() const { return used_tools_; }
  int used_attempts() const { return used_attempts_; }
  int remaining_tools() const { return budget_.max_tool_uses - used_tools_; }
  int remaining_attempts() const { return budget_.max_attempts - used_attempts_; }
  SessionState state() const { return state_; }
  bool closed() const { return closed_; }
  std::chrono::steady_clock::time_point last_activity() const { return last_activity_; }

  /// Task as the solver sees it: failing tests always, the target only in
  /// remove mode.
  nlohmann::json description() const;
  std::string system_prompt() const;

  // Tools. Each throws Error on rejection; rejected calls cost nothing.
  nlohmann::json list_directory(std::string_view path);
  nlohmann::json search_code(const std::string& pattern, bool is_regex);
  nlohmann::json read_file(std::string_view path);
  nlohmann::json list_file_functions(std::string_view path);
  nlohmann::json read_function(std::string_view unit_id);
  SubmissionResult submit_attempt(const std::string& code);
  SubmissionResult replace_function(std::string_view unit_id, const std::string& code);

  /// Dispatches by tool name and records the call in the trajectory. The
  /// only entry point that records events; agents and the HTTP API both go
  /// through it.
  InvokeResult invoke(std::string_view tool, const nlohmann::json& args);

  /// 1 iff the last suite run passed, no test file changed and, in discovery
  /// mode, at least one corrupted target differs from its corrupted form.
  int score() const;
  bool test_files_modified() const;
  bool target_modified() const;

  /// Scores and freezes the session. Idempotent.
  const Trajectory& close(std::string reason = {});
  void fail(const std::string& reason);
  const Trajectory& trajectory() const { return trajectory_; }

 private:
  void require_open() const;
  void charge_tool();
  std::filesystem::path resolve(std::string_view path) const;
  SubmissionResult run_submission(const std::string& unit_id, const std::string& code);
  void record(std::string_view tool, const nlohmann::json& args, const nlohmann::json& result, bool rejected,
              const SubmissionResult* submission);

  std::string id_;
  TaskInstance task_;
  std::shared_ptr<const EvalEnvironment> env_;
  BudgetConfig budget_;
  SessionOptions options_;
  std::unique_ptr<Sandbox> sandbox_;
  std::map<std::string, std::string> test_digests_;
  int used_tools_ = 0;
  int used_attempts_ = 0;
  SessionState state_ = SessionState::Active;
  bool closed_ = false;
  std::optional<SubmissionResult> last_submission_;
  std::optional<int> first_pass_;
  std::map<std::string, std::vector<std::string>> edits_;
  Trajectory trajectory_;
  std::chrono::steady_clock::time_point opened_;
  std::chrono::steady_clock::time_point last_activity_;
};

/// With `cache_suites`, sessions sharing the environment reuse reports for
/// tree states already run.
std::shared_ptr<const EvalEnvironment> make_environment(const Repository& repo, const SuiteReport& baseline,
                                                        const HarnessOptions& harness = {},
                                                        bool cache_suites = false);

}  // namespace breakpoint
