#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/task.hpp"

namespace breakpoint {

struct BudgetConfig {
  int max_tool_uses = 16;
  int max_attempts = 4;
  friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

/// "small" 4/1, "medium" 8/2, "default" 16/4, "xl" 32/8; the "T/A" spelling
/// of any of them is accepted too. Throws Error(InvalidArgument).
BudgetConfig budget_preset(std::string_view name);
std::vector<std::string> budget_preset_names();

enum class SessionState { Active, Exhausted, Solved, Failed };
std::string_view to_string(SessionState s);
SessionState session_state_from_string(std::string_view s);

/// Tools that read the environment, as opposed to submitting code.
bool is_info_tool(std::string_view tool);
bool is_submission_tool(std::string_view tool);

struct TrajectoryEvent {
  int seq = 0;
  std::string kind;  // "info", "submission" or "rejected"
  std::string tool;
  nlohmann::json args;
  std::string args_digest;
  std::string result_digest;
  double t = 0.0;  // seconds since the session opened (or seq on a logical clock)
  // Submissions only.
  int attempt = 0;
  std::string unit_id;
  int failing_count = 0;
  bool passed = false;
};

struct SubmissionRecord {
  int attempt = 0;
  std::string unit_id;
  std::string patch_digest;
  int failing_count = 0;
  bool passed = false;
};

struct Trajectory {
  std::string session_id;
  std::string task_id;
  std::string label;
  TaskMode mode = TaskMode::Remove;
  BudgetConfig budget;
  std::vector<TrajectoryEvent> events;
  std::vector<SubmissionRecord> submissions;
  int score = 0;
  std::optional<int> solved_at_attempt;
  int used_tools = 0;
  int used_attempts = 0;
  SessionState state = SessionState::Active;
  std::string reason;  // why a failed session ended

  int info_calls() const;
  std::map<std::string, int> tool_counts() const;  // accepted calls per tool

  /// One event per line followed by the terminal summary line.
  std::string to_jsonl() const;
  static Trajectory from_jsonl(std::string_view text);
  nlohmann::json summary() const;
};

void write_trajectory(const std::filesystem::path& path, const Trajectory& t);
Trajectory read_trajectory(const std::filesystem::path& path);
/// Every *.jsonl under `dir` (recursively), sorted by path.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& dir);

}  // namespace breakpoint
