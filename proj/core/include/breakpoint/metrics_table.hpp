#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/repo_model.hpp"

namespace breakpoint {

struct MetricsRecord {
  std::string unit;
  int loc = 0;
  int cyclomatic = 1;
  double halstead_difficulty = 0.0;
  double halstead_volume = 0.0;
  int nesting_depth = 0;
  int in_degree = 0;
  int out_degree = 0;
  int total_degree = 0;
  double pagerank = 0.0;
  double harmonic = 0.0;     // out-direction, normalized (default centrality)
  double harmonic_in = 0.0;  // in-direction, unnormalized
  double distance_discount = 0.0;
  double betweenness = 0.0;
};

/// Metric columns in file order.
const std::vector<std::string>& metric_names();
/// Throws Error(InvalidArgument) for an unknown name.
double metric_value(const MetricsRecord& r, std::string_view name);

struct NormalizedMetrics {
  std::string unit;
  std::vector<double> z;           // aligned with metric_names()
  std::vector<double> percentile;  // fraction of records strictly below

  double zscore(std::string_view metric) const;
  double pct(std::string_view metric) const;
};

/// Population z-scores and strictly-less percentile ranks. Constant metrics
/// get z = 0. Throws Error(TooFewRecords) for fewer than 2 records.
std::vector<NormalizedMetrics> normalize(const std::vector<MetricsRecord>& records);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> r;  // nullopt: zero variance
};

/// Pearson r between every pair of metrics. Throws Error(TooFewRecords) for
/// fewer than 3 records.
CorrelationMatrix correlation_matrix(const std::vector<MetricsRecord>& records);

/// Two-pass Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Complexity and centrality of every unit, in repository order.
std::vector<MetricsRecord> compute_metrics(const Repository& repo, const CallGraph& graph);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);
void write_correlations_csv(const std::filesystem::path& path, const CorrelationMatrix& m);
/// Column documentation written next to metrics.csv.
nlohmann::json metrics_schema();

/// Shortest round-trip decimal form used in every CSV this library writes.
std::string format_double(double v);

}  // namespace breakpoint
