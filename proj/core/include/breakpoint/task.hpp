#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/metrics_table.hpp"
#include "breakpoint/repo_model.hpp"

namespace breakpoint {

enum class CorruptionMethod { Deletion, Adversarial };
enum class TaskMode { Remove, Discovery };

std::string_view to_string(CorruptionMethod m);
std::string_view to_string(TaskMode m);
CorruptionMethod corruption_method_from_string(std::string_view s);
TaskMode task_mode_from_string(std::string_view s);

/// A replacement text for one unit. `corrupted_body` is the full unit source
/// (header included) as it is written into the file.
struct Corruption {
  std::string target;
  CorruptionMethod method = CorruptionMethod::Deletion;
  std::string corrupted_body;
  std::string original_digest;  // content_digest of the original unit text
};

struct RepoRef {
  std::string source;  // locator of the pristine tree (absolute path)
  std::string commit;
};

struct TargetMetrics {
  MetricsRecord raw;
  NormalizedMetrics normalized;
};

inline constexpr std::string_view kGeneratorVersion = "breakpoint-taskgen/1";

struct TaskInstance {
  std::string task_id;
  RepoRef repo_ref;
  TaskMode mode = TaskMode::Remove;
  std::vector<Corruption> corruptions;
  std::set<std::string> failing_tests;
  std::map<std::string, TargetMetrics> metrics;  // keyed by target id
  std::string generator_version{kGeneratorVersion};
  std::uint64_t seed = 0;

  std::vector<std::string> targets() const;
  /// Largest percentile of `metric` over the targets (0 when unknown).
  double max_percentile(std::string_view metric) const;
};

/// "bp-" + first 16 hex digits of sha256 over commit, targets and bodies.
std::string compute_task_id(std::string_view commit, TaskMode mode, const std::vector<Corruption>& corruptions);

nlohmann::json to_json(const Corruption& c);
nlohmann::json to_json(const TaskInstance& t);
Corruption corruption_from_json(const nlohmann::json& j);
/// Throws Error(SchemaError) on missing or mistyped fields.
TaskInstance task_from_json(const nlohmann::json& j);

void write_task(const std::filesystem::path& path, const TaskInstance& task);
TaskInstance read_task(const std::filesystem::path& path);

/// Tasks in `<store>/tasks/*.json`, sorted by task id.
std::vector<TaskInstance> load_task_store(const std::filesystem::path& store);

/// Checks the structural invariants (mode/method pairing, threshold, distance
/// bound when `graph` is given). Returns an empty string when they hold.
std::string check_task_invariants(const TaskInstance& task, int min_failing, const CallGraph* graph = nullptr,
                                  std::size_t max_distance = 4);

/// The unit of `repo` whose text digest equals `digest`, if any.
const FunctionUnit* find_by_digest(const Repository& repo, std::string_view digest);

nlohmann::json to_json(const MetricsRecord& r);
MetricsRecord metrics_record_from_json(const std::string& unit, const nlohmann::json& j);

}  // namespace breakpoint
