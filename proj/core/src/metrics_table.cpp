#include "breakpoint/metrics_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "breakpoint/complexity.hpp"
#include "breakpoint/csv.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/graph_metrics.hpp"

namespace breakpoint {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "loc",       "cyclomatic", "halstead_difficulty", "halstead_volume", "nesting_depth",
      "in_degree", "out_degree", "total_degree",        "pagerank",        "harmonic",
      "harmonic_in", "distance_discount", "betweenness"};
  return names;
}

double metric_value(const MetricsRecord& r, std::string_view name) {
  if (name == "loc") return r.loc;
  if (name == "cyclomatic") return r.cyclomatic;
  if (name == "halstead_difficulty") return r.halstead_difficulty;
  if (name == "halstead_volume") return r.halstead_volume;
  if (name == "nesting_depth") return r.nesting_depth;
  if (name == "in_degree") return r.in_degree;
  if (name == "out_degree") return r.out_degree;
  if (name == "total_degree") return r.total_degree;
  if (name == "pagerank") return r.pagerank;
  if (name == "harmonic") return r.harmonic;
  if (name == "harmonic_in") return r.harmonic_in;
  if (name == "distance_discount") return r.distance_discount;
  if (name == "betweenness") return r.betweenness;
  throw Error(Errc::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

namespace {

std::size_t metric_index(std::string_view name) {
  const auto& names = metric_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(Errc::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::vector<double> column(const std::vector<MetricsRecord>& records, std::string_view name) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(metric_value(r, name));
  return out;
}

}  // namespace

double NormalizedMetrics::zscore(std::string_view metric) const { return z.at(metric_index(metric)); }

double NormalizedMetrics::pct(std::string_view metric) const {
  return percentile.at(metric_index(metric));
}

std::vector<NormalizedMetrics> normalize(const std::vector<MetricsRecord>& records) {
  if (records.size() < 2) throw Error(Errc::TooFewRecords, "normalize needs at least 2 records");
  const auto& names = metric_names();
  const double n = static_cast<double>(records.size());
  std::vector<NormalizedMetrics> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i].unit = records[i].unit;
    out[i].z.resize(names.size());
    out[i].percentile.resize(names.size());
  }
  for (std::size_t m = 0; m < names.size(); ++m) {
    const auto values = column(records, names[m]);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i].z[m] = sd > 0.0 ? (values[i] - mean) / sd : 0.0;
      std::size_t below = 0;
      for (double v : values) below += v < values[i] ? 1 : 0;
      out[i].percentile[m] = static_cast<double>(below) / n;
    }
  }
  return out;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw Error(Errc::InvalidArgument, "pearson: size mismatch");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

CorrelationMatrix correlation_matrix(const std::vector<MetricsRecord>& records) {
  if (records.size() < 3) throw Error(Errc::TooFewRecords, "correlation needs at least 3 records");
  CorrelationMatrix m;
  m.names = metric_names();
  const std::size_t k = m.names.size();
  std::vector<std::vector<double>> cols;
  for (const auto& name : m.names) cols.push_back(column(records, name));
  m.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      std::optional<double> r = pearson(cols[i], cols[j]);
      if (i == j && r) r = 1.0;
      m.r[i][j] = r;
      m.r[j][i] = r;
    }
  }
  return m;
}

std::vector<MetricsRecord> compute_metrics(const Repository& repo, const CallGraph& graph) {
  const Centrality c = compute_centrality(graph);
  std::vector<MetricsRecord> out;
  out.reserve(repo.units.size());
  for (const FunctionUnit& u : repo.units) {
    const std::size_t v = graph.index_of(u.id);
    const Complexity cx = measure_complexity(u);
    MetricsRecord r;
    r.unit = u.id;
    r.loc = cx.loc;
    r.cyclomatic = cx.cyclomatic;
    r.halstead_difficulty = cx.halstead.difficulty;
    r.halstead_volume = cx.halstead.volume;
    r.nesting_depth = cx.nesting_depth;
    r.in_degree = static_cast<int>(c.degrees[v].in);
    r.out_degree = static_cast<int>(c.degrees[v].out);
    r.total_degree = static_cast<int>(c.degrees[v].total);
    r.pagerank = c.pagerank[v];
    r.harmonic = c.harmonic[v];
    r.harmonic_in = c.harmonic_in[v];
    r.distance_discount = c.distance_discount[v];
    r.betweenness = c.betweenness[v];
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  CsvWriter w(path);
  std::vector<std::string> header{"unit"};
  for (const auto& n : metric_names()) header.push_back(n);
  w.row(header);
  for (const auto& r : records) {
    std::vector<std::string> row{r.unit};
    row.push_back(std::to_string(r.loc));
    row.push_back(std::to_string(r.cyclomatic));
    row.push_back(format_double(r.halstead_difficulty));
    row.push_back(format_double(r.halstead_volume));
    row.push_back(std::to_string(r.nesting_depth));
    row.push_back(std::to_string(r.in_degree));
    row.push_back(std::to_string(r.out_degree));
    row.push_back(std::to_string(r.total_degree));
    row.push_back(format_double(r.pagerank));
    row.push_back(format_double(r.harmonic));
    row.push_back(format_double(r.harmonic_in));
    row.push_back(format_double(r.distance_discount));
    row.push_back(format_double(r.betweenness));
    w.row(row);
  }
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<MetricsRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    MetricsRecord r;
    r.unit = t.get(i, "unit");
    r.loc = std::stoi(t.get(i, "loc"));
    r.cyclomatic = std::stoi(t.get(i, "cyclomatic"));
    r.halstead_difficulty = std::stod(t.get(i, "halstead_difficulty"));
    r.halstead_volume = std::stod(t.get(i, "halstead_volume"));
    r.nesting_depth = std::stoi(t.get(i, "nesting_depth"));
    r.in_degree = std::stoi(t.get(i, "in_degree"));
    r.out_degree = std::stoi(t.get(i, "out_degree"));
    r.total_degree = std::stoi(t.get(i, "total_degree"));
    r.pagerank = std::stod(t.get(i, "pagerank"));
    r.harmonic = std::stod(t.get(i, "harmonic"));
    r.harmonic_in = std::stod(t.get(i, "harmonic_in"));
    r.distance_discount = std::stod(t.get(i, "distance_discount"));
    r.betweenness = std::stod(t.get(i, "betweenness"));
    out.push_back(std::move(r));
  }
  return out;
}

void write_correlations_csv(const std::filesystem::path& path, const CorrelationMatrix& m) {
  CsvWriter w(path);
  std::vector<std::string> header{"metric"};
  for (const auto& n : m.names) header.push_back(n);
  w.row(header);
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    std::vector<std::string> row{m.names[i]};
    for (const auto& v : m.r[i]) row.push_back(v ? format_double(*v) : "NA");
    w.row(row);
  }
}

nlohmann::json metrics_schema() {
  using nlohmann::json;
  auto col = [](const char* name, const char* type, const char* doc) {
    return json{{"name", name}, {"type", type}, {"description", doc}};
  };
  return {{"schema_version", 1},
          {"file", "metrics.csv"},
          {"columns",
           json::array({
               col("unit", "string", "unit id: <relative path>::<qualified name>"),
               col("loc", "integer", "body lines with code, signature and docstring excluded"),
               col("cyclomatic", "integer", "1 + decision points"),
               col("halstead_difficulty", "real", "eta1/2 * N2/eta2"),
               col("halstead_volume", "real", "(N1+N2) * log2(eta1+eta2)"),
               col("nesting_depth", "integer", "deepest nesting of compound statements in the body"),
               col("in_degree", "integer", "callers"),
               col("out_degree", "integer", "callees"),
               col("total_degree", "integer", "in_degree + out_degree"),
               col("pagerank", "real", "damping 0.85, dangling mass spread uniformly"),
               col("harmonic", "real", "sum of 1/d to reachable callees, divided by |V|-1"),
               col("harmonic_in", "real", "sum of 1/d from transitive callers, not normalized"),
               col("distance_discount", "real", "sum of 0.5^d over reachable callees"),
               col("betweenness", "real", "directed, unnormalized"),
           })},
          {"missing_value", "NA"}};
}

}  // namespace breakpoint
