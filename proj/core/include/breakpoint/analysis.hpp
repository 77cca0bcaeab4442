#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/task.hpp"
#include "breakpoint/trajectory.hpp"

namespace breakpoint {

/// One evaluated (task, label) pair.
struct ResultRow {
  std::string task_id;
  std::string label;
  TaskMode mode = TaskMode::Remove;
  int score = 0;
  std::optional<int> solved_at_attempt;
  int corruption_count = 1;
  std::map<std::string, double> z;    // metric -> mean z-score over targets
  std::map<std::string, double> pct;  // metric -> lowest percentile over targets
  int info_calls = 0;
  int submissions = 0;
  std::map<std::string, int> tool_counts;

  /// "corruptions" or a metric name.
  double predictor(std::string_view name) const;
};

/// Joins trajectories with their tasks; trajectories of unknown tasks are
/// skipped.
std::vector<ResultRow> build_results(const std::vector<TaskInstance>& tasks,
                                     const std::vector<Trajectory>& trajectories);

struct Coefficient {
  std::string name;
  double beta = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  double odds_ratio() const;
};

struct LogisticFit {
  std::vector<Coefficient> coefficients;  // intercept first
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double mcfadden_r2 = 0.0;
  double aic = 0.0;  // k counts the intercept
  bool converged = false;
  bool separation = false;
  int iterations = 0;
  std::size_t n = 0;

  double linear_predictor(const std::vector<double>& x) const;
  nlohmann::json to_json() const;
};

struct FitOptions {
  std::size_t min_rows = 10;
  int max_iter = 100;
  double tol = 1e-10;  // on the log-likelihood
};

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. `x` holds one row per observation without the intercept column.
/// Throws DegenerateOutcomes, RankDeficient, TooFewRecords; separation is
/// flagged on the result.
LogisticFit fit_logistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const std::vector<std::string>& names, const FitOptions& options = {});
LogisticFit fit_logistic(const std::vector<ResultRow>& rows, const std::vector<std::string>& predictors,
                         const FitOptions& options = {});

struct MannWhitney {
  double u = 0.0;  // for the first sample
  double p = 1.0;  // two-sided
  double r = 0.0;  // rank-biserial, 1 - 2U/(n1 n2)
  bool exact = false;
};

MannWhitney mann_whitney(const std::vector<double>& a, const std::vector<double>& b);

/// Pooled-SD standardized mean difference (a - b).
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

/// Entry n-1 is the fraction of trajectories solved by submission n. The
/// length is the largest attempt budget seen.
std::vector<double> passn_curve(const std::vector<Trajectory>& trajectories);

struct GridCell {
  double x_center = 0.0;
  double y_center = 0.0;
  int count = 0;
  int solved = 0;
  double rate() const;  // NaN for empty cells
};

struct BoundaryPoint {
  std::string level;  // "zero_logit", "p75", "p95"
  double x = 0.0;
  double y = 0.0;
};

struct DifficultyGrid {
  std::string x_metric;
  std::string y_metric;
  std::vector<GridCell> cells;  // row-major, x fastest
  std::vector<BoundaryPoint> boundary;
};

/// Square bins over the observed range of the two predictors, with the
/// zero-logit line of `fit` and the lines where predicted difficulty reaches
/// its 75th and 95th percentiles over the rows. `fit` must contain both
/// predictors.
DifficultyGrid difficulty_grid(const std::vector<ResultRow>& rows, const std::string& x_metric,
                               const std::string& y_metric, int bins, const LogisticFit& fit);

struct TelemetryRow {
  std::string label;
  std::string mode;
  std::size_t n = 0;
  double mean_info_calls = 0.0;
  double mean_submissions = 0.0;
  std::map<std::string, double> mean_tool_calls;
};

std::vector<TelemetryRow> telemetry_summary(const std::vector<Trajectory>& trajectories);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean.
Interval bootstrap_mean_ci(const std::vector<double>& values, int resamples = 1000, std::uint64_t seed = 0,
                           double level = 0.95);

/// Success rate by corruption count with a bootstrap interval.
struct ScalingPoint {
  int k = 0;
  std::size_t n = 0;
  double rate = 0.0;
  Interval ci;
};
std::vector<ScalingPoint> success_by_corruptions(const std::vector<ResultRow>& rows, std::uint64_t seed = 0);

}  // namespace breakpoint
