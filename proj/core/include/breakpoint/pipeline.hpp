#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/analysis.hpp"
#include "breakpoint/harness.hpp"
#include "breakpoint/llm.hpp"
#include "breakpoint/taskgen.hpp"

namespace breakpoint {

/// Every knob of a pipeline run. Loaded from JSON; unknown keys are errors.
struct PipelineConfig {
  std::filesystem::path repo;
  std::string test_command;  // empty: the default pytest command
  std::filesystem::path store = "store";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double cap_seconds = 60.0;

  bool deletion = true;
  bool adversarial = false;
  std::vector<int> multifunction;
  std::size_t sets_per_k = 8;
  std::size_t max_distance = 4;
  int min_failing = 5;
  int floor = 2;
  int test_budget = 5;
  int max_tool_calls = 10;
  std::size_t max_targets = 0;
  std::string corruption_client = "scripted";  // or "llm"

  std::string budget_preset = "default";
  bool logical_clock = false;  // event times become sequence numbers

  double hard_set_pct = 0.90;
  std::string x_metric = "loc";
  std::string y_metric = "harmonic";
  int grid_bins = 6;

  std::string llm_model;
  std::string llm_base_url;  // empty: environment or provider default
  double llm_temperature = 0.0;

  /// Throws Error(InvalidArgument) naming the first out-of-range field.
  void validate() const;
  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  LlmConfig llm() const;
};

/// Store layout under PipelineConfig::store.
struct StorePaths {
  std::filesystem::path root;
  std::filesystem::path repo() const { return root / "repo"; }
  std::filesystem::path tasks() const { return root / "tasks"; }
  std::filesystem::path trajectories() const { return root / "trajectories"; }
  std::filesystem::path report() const { return root / "report"; }
  std::filesystem::path lock() const { return root / ".lock"; }
};

nlohmann::json baseline_to_json(const SuiteReport& report);

struct IngestSummary {
  std::size_t units = 0;
  std::size_t edges = 0;
};

/// snapshot.json, metrics.csv, metrics_schema.json and correlations.csv.
IngestSummary cmd_ingest(const PipelineConfig& config);

/// Ingests, checks the baseline, generates and validates tasks, and writes
/// the store. Throws BaselineFailed, NoTasksGenerated.
GenerationReport cmd_generate(const PipelineConfig& config);

struct ValidationSummary {
  std::size_t checked = 0;
  std::vector<std::string> mismatched;  // task ids whose failing set changed
};

/// Re-runs every stored task and compares failing sets.
ValidationSummary cmd_validate(const PipelineConfig& config);

struct TaskFilter {
  std::optional<TaskMode> mode;
  std::set<int> corruption_counts;  // empty: any
  std::set<std::string> task_ids;   // empty: any
  bool hard_only = false;
  bool matches(const TaskInstance& t) const;
};

struct EvaluationSummary {
  std::string label;
  std::size_t run = 0;
  std::size_t skipped = 0;  // already had a trajectory
  std::size_t solved = 0;
  std::size_t failed = 0;   // client failures
};

/// Agent specs: "oracle", "null", "competence:<c>[:<seed>]", "llm:<model>".
/// One trajectory per task under trajectories/<label>/; existing ones are
/// kept. Throws UnknownAgent.
EvaluationSummary cmd_evaluate(const PipelineConfig& config, const std::string& agent_spec,
                               const TaskFilter& filter = {});

/// Label derived from an agent spec and budget preset, safe as a directory
/// name.
std::string agent_label(const std::string& agent_spec, const std::string& preset);

struct ReportOptions {
  bool hard_only = false;  // restrict the grid to the hard set
};

/// results.csv, fit.json, passn.csv, telemetry.csv, grid.csv, scaling.csv,
/// distributions.csv and hard_set.json under report/. Throws NoResults.
std::vector<std::filesystem::path> cmd_report(const PipelineConfig& config, const ReportOptions& options = {});

}  // namespace breakpoint
