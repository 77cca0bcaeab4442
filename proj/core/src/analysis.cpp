#include "breakpoint/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "breakpoint/error.hpp"
#include "breakpoint/metrics_table.hpp"

using nlohmann::json;

namespace breakpoint {

double ResultRow::predictor(std::string_view name) const {
  if (name == "corruptions") return corruption_count;
  auto it = z.find(std::string(name));
  if (it == z.end()) throw Error(Errc::InvalidArgument, "unknown predictor '" + std::string(name) + "'");
  return it->second;
}

std::vector<ResultRow> build_results(const std::vector<TaskInstance>& tasks,
                                     const std::vector<Trajectory>& trajectories) {
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& t : tasks) by_id[t.task_id] = &t;
  std::vector<ResultRow> rows;
  for (const auto& tr : trajectories) {
    auto it = by_id.find(tr.task_id);
    if (it == by_id.end()) continue;
    const TaskInstance& task = *it->second;
    ResultRow r;
    r.task_id = task.task_id;
    r.label = tr.label;
    r.mode = task.mode;
    r.score = tr.score;
    r.solved_at_attempt = tr.solved_at_attempt;
    r.corruption_count = static_cast<int>(task.corruptions.size());
    for (const auto& name : metric_names()) {
      double sum = 0.0;
      double low = std::numeric_limits<double>::infinity();
      std::size_t n = 0;
      for (const auto& c : task.corruptions) {
        auto m = task.metrics.find(c.target);
        if (m == task.metrics.end()) continue;
        sum += m->second.normalized.zscore(name);
        low = std::min(low, m->second.normalized.pct(name));
        ++n;
      }
      if (n == 0) continue;
      r.z[name] = sum / static_cast<double>(n);
      r.pct[name] = low;
    }
    r.info_calls = tr.info_calls();
    r.submissions = tr.used_attempts;
    r.tool_counts = tr.tool_counts();
    rows.push_back(std::move(r));
  }
  return rows;
}

double Coefficient::odds_ratio() const { return std::exp(beta); }

double LogisticFit::linear_predictor(const std::vector<double>& x) const {
  if (x.size() + 1 != coefficients.size()) throw Error(Errc::InvalidArgument, "predictor count mismatch");
  double eta = coefficients.front().beta;
  for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients[j + 1].beta * x[j];
  return eta;
}

json LogisticFit::to_json() const {
  json coefs = json::array();
  for (const auto& c : coefficients) {
    coefs.push_back({{"name", c.name},
                     {"beta", c.beta},
                     {"se", c.se},
                     {"z", c.z},
                     {"p", c.p},
                     {"odds_ratio", c.odds_ratio()}});
  }
  return {{"n", n},
          {"coefficients", coefs},
          {"log_likelihood", log_likelihood},
          {"null_log_likelihood", null_log_likelihood},
          {"mcfadden_r2", mcfadden_r2},
          {"aic", aic},
          {"converged", converged},
          {"separation", separation},
          {"iterations", iterations}};
}

namespace {

// log(1 + e^eta) without overflow.
double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

LogisticFit fit_logistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const std::vector<std::string>& names, const FitOptions& options) {
  const std::size_t n = y.size();
  if (x.size() != n) throw Error(Errc::InvalidArgument, "x and y differ in length");
  if (n < options.min_rows || n == 0) {
    throw Error(Errc::TooFewRecords, "logistic fit needs at least " + std::to_string(options.min_rows) + " rows");
  }
  const std::size_t p = names.size() + 1;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].size() != names.size()) throw Error(Errc::InvalidArgument, "row width differs from predictor count");
    if (y[i] != 0 && y[i] != 1) throw Error(Errc::InvalidArgument, "outcomes must be 0 or 1");
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < names.size(); ++j) X(i, j + 1) = x[i][j];
    Y[i] = y[i];
    ones += y[i];
  }
  if (ones == 0 || ones == n) throw Error(Errc::DegenerateOutcomes, "all outcomes are identical");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-9);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    throw Error(Errc::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
  }

  LogisticFit fit;
  fit.n = n;
  const double ybar = static_cast<double>(ones) / static_cast<double>(n);
  fit.null_log_likelihood = static_cast<double>(n) * (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  Eigen::VectorXd eta = X * beta;
  double ll = log_likelihood(eta, Y);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    fit.iterations = iter;
    Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    Eigen::VectorXd w = mu.cwiseProduct(Eigen::VectorXd::Ones(mu.size()) - mu).cwiseMax(1e-12);
    const Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    const Eigen::VectorXd g = X.transpose() * (Y - mu);
    beta += H.ldlt().solve(g);
    eta = X * beta;
    const double next = log_likelihood(eta, Y);
    const bool done = std::abs(next - ll) < options.tol;
    ll = next;
    if (done) {
      fit.converged = true;
      break;
    }
  }
  // Diverging coefficients saturate some fitted probabilities.
  if (eta.cwiseAbs().maxCoeff() > 25.0 || !std::isfinite(ll)) {
    fit.separation = true;
    fit.converged = false;
  }
  Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  Eigen::VectorXd w = mu.cwiseProduct(Eigen::VectorXd::Ones(mu.size()) - mu).cwiseMax(1e-300);
  const Eigen::MatrixXd cov = (X.transpose() * w.asDiagonal() * X).inverse();
  for (std::size_t j = 0; j < p; ++j) {
    Coefficient c;
    c.name = j == 0 ? "intercept" : names[j - 1];
    c.beta = beta[static_cast<Eigen::Index>(j)];
    c.se = std::sqrt(cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    c.z = c.se > 0.0 ? c.beta / c.se : 0.0;
    c.p = normal_two_sided(c.z);
    fit.coefficients.push_back(std::move(c));
  }
  fit.log_likelihood = ll;
  fit.mcfadden_r2 = 1.0 - ll / fit.null_log_likelihood;
  fit.aic = 2.0 * static_cast<double>(p) - 2.0 * ll;
  return fit;
}

LogisticFit fit_logistic(const std::vector<ResultRow>& rows, const std::vector<std::string>& predictors,
                         const FitOptions& options) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto& r : rows) {
    std::vector<double> xi;
    for (const auto& name : predictors) xi.push_back(r.predictor(name));
    x.push_back(std::move(xi));
    y.push_back(r.score);
  }
  return fit_logistic(x, y, predictors, options);
}

namespace {

// Midranks of the pooled sample; also reports whether any tie occurred and
// the tie correction term sum(t^3 - t).
struct Ranks {
  std::vector<double> rank;
  bool ties = false;
  double tie_term = 0.0;
};

Ranks pooled_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Ranks r;
  r.rank.resize(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r.rank[order[k]] = mid;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1) {
      r.ties = true;
      r.tie_term += t * t * t - t;
    }
    i = j + 1;
  }
  return r;
}

// Number of arrangements giving each U for sample sizes (m, n):
// c(m, n, u) = c(m-1, n, u-n) + c(m, n-1, u).
std::vector<double> u_distribution(std::size_t m, std::size_t n) {
  std::vector<std::vector<std::vector<double>>> c(m + 1, std::vector<std::vector<double>>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      c[i][j].assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        c[i][j][0] = 1.0;
        continue;
      }
      for (std::size_t u = 0; u <= i * j; ++u) {
        double v = 0.0;
        if (u >= j && u - j < c[i - 1][j].size()) v += c[i - 1][j][u - j];
        if (u < c[i][j - 1].size()) v += c[i][j - 1][u];
        c[i][j][u] = v;
      }
    }
  }
  return c[m][n];
}

}  // namespace

MannWhitney mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(Errc::InvalidArgument, "mann_whitney needs non-empty samples");
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const Ranks ranks = pooled_ranks(pooled);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks.rank[i];
  MannWhitney out;
  out.u = r1 - n1 * (n1 + 1.0) / 2.0;
  out.r = 1.0 - 2.0 * out.u / (n1 * n2);
  if (a.size() + b.size() <= 16 && !ranks.ties) {
    out.exact = true;
    const auto dist = u_distribution(a.size(), b.size());
    double total = 0.0;
    for (double c : dist) total += c;
    const auto u = static_cast<std::size_t>(std::llround(out.u));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      if (k <= u) lower += dist[k];
      if (k >= u) upper += dist[k];
    }
    out.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return out;
  }
  const double n = n1 + n2;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
  if (var <= 0.0) {
    out.p = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(out.u - mean) - 0.5) / std::sqrt(var);
  out.p = std::min(1.0, normal_two_sided(z));
  return out;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::InvalidArgument, "cohens_d needs at least 2 values per sample");
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto ss = [](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double ma = mean(a);
  const double mb = mean(b);
  const double pooled = (ss(a, ma) + ss(b, mb)) / static_cast<double>(a.size() + b.size() - 2);
  if (pooled <= 0.0) throw Error(Errc::ZeroVariance, "pooled variance is zero");
  return (ma - mb) / std::sqrt(pooled);
}

std::vector<double> passn_curve(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) return {};
  int length = 0;
  for (const auto& t : trajectories) length = std::max(length, t.budget.max_attempts);
  std::vector<double> curve(static_cast<std::size_t>(length), 0.0);
  for (const auto& t : trajectories) {
    if (t.score != 1 || !t.solved_at_attempt) continue;
    for (int n = *t.solved_at_attempt; n <= length; ++n) curve[static_cast<std::size_t>(n - 1)] += 1.0;
  }
  for (double& v : curve) v /= static_cast<double>(trajectories.size());
  return curve;
}

double GridCell::rate() const {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(solved) / count;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::size_t coefficient_index(const LogisticFit& fit, const std::string& name) {
  for (std::size_t i = 1; i < fit.coefficients.size(); ++i) {
    if (fit.coefficients[i].name == name) return i;
  }
  throw Error(Errc::InvalidArgument, "fit has no coefficient '" + name + "'");
}

}  // namespace

DifficultyGrid difficulty_grid(const std::vector<ResultRow>& rows, const std::string& x_metric,
                               const std::string& y_metric, int bins, const LogisticFit& fit) {
  if (bins < 1) throw Error(Errc::InvalidArgument, "bins must be positive");
  DifficultyGrid grid;
  grid.x_metric = x_metric;
  grid.y_metric = y_metric;
  const std::size_t ix = coefficient_index(fit, x_metric);
  const std::size_t iy = coefficient_index(fit, y_metric);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    xs.push_back(r.predictor(x_metric));
    ys.push_back(r.predictor(y_metric));
  }
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (!rows.empty()) {
    x0 = *std::min_element(xs.begin(), xs.end());
    x1 = *std::max_element(xs.begin(), xs.end());
    y0 = *std::min_element(ys.begin(), ys.end());
    y1 = *std::max_element(ys.begin(), ys.end());
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double wx = (x1 - x0) / bins;
  const double wy = (y1 - y0) / bins;
  grid.cells.resize(static_cast<std::size_t>(bins * bins));
  for (int j = 0; j < bins; ++j) {
    for (int i = 0; i < bins; ++i) {
      GridCell& c = grid.cells[static_cast<std::size_t>(j * bins + i)];
      c.x_center = x0 + (i + 0.5) * wx;
      c.y_center = y0 + (j + 0.5) * wy;
    }
  }
  auto bin = [bins](double v, double lo, double w) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / w)), 0, bins - 1);
  };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    GridCell& c = grid.cells[static_cast<std::size_t>(bin(ys[k], y0, wy) * bins + bin(xs[k], x0, wx))];
    ++c.count;
    c.solved += rows[k].score;
  }

  // Lines b0 + bx*x + by*y = level. Difficulty is the negated logit, so the
  // q-th difficulty percentile sits at logit -quantile(difficulty, q).
  const double b0 = fit.coefficients[0].beta;
  const double bx = fit.coefficients[ix].beta;
  const double by = fit.coefficients[iy].beta;
  std::vector<double> difficulty;
  for (const auto& r : rows) {
    std::vector<double> xi;
    for (std::size_t j = 1; j < fit.coefficients.size(); ++j) xi.push_back(r.predictor(fit.coefficients[j].name));
    difficulty.push_back(-fit.linear_predictor(xi));
  }
  std::vector<std::pair<std::string, double>> levels = {{"zero_logit", 0.0}};
  if (!difficulty.empty()) {
    levels.emplace_back("p75", -quantile(difficulty, 0.75));
    levels.emplace_back("p95", -quantile(difficulty, 0.95));
  }
  for (const auto& [name, level] : levels) {
    if (by != 0.0) {
      for (int i = 0; i <= bins; ++i) {
        const double x = x0 + i * wx;
        grid.boundary.push_back({name, x, (level - b0 - bx * x) / by});
      }
    } else if (bx != 0.0) {
      const double x = (level - b0) / bx;
      grid.boundary.push_back({name, x, y0});
      grid.boundary.push_back({name, x, y1});
    }
  }
  return grid;
}

std::vector<TelemetryRow> telemetry_summary(const std::vector<Trajectory>& trajectories) {
  std::map<std::pair<std::string, std::string>, std::vector<const Trajectory*>> groups;
  for (const auto& t : trajectories) groups[{t.label, std::string(to_string(t.mode))}].push_back(&t);
  std::vector<TelemetryRow> out;
  for (const auto& [key, members] : groups) {
    TelemetryRow row;
    row.label = key.first;
    row.mode = key.second;
    row.n = members.size();
    std::map<std::string, double> tools;
    for (const Trajectory* t : members) {
      row.mean_info_calls += t->info_calls();
      row.mean_submissions += t->used_attempts;
      for (const auto& [tool, count] : t->tool_counts()) tools[tool] += count;
    }
    const double n = static_cast<double>(row.n);
    row.mean_info_calls /= n;
    row.mean_submissions /= n;
    for (auto& [tool, total] : tools) row.mean_tool_calls[tool] = total / n;
    out.push_back(std::move(row));
  }
  return out;
}

Interval bootstrap_mean_ci(const std::vector<double>& values, int resamples, std::uint64_t seed, double level) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  std::mt19937_64 rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng() % values.size()];
    means.push_back(s / static_cast<double>(values.size()));
  }
  const double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

std::vector<ScalingPoint> success_by_corruptions(const std::vector<ResultRow>& rows, std::uint64_t seed) {
  std::map<int, std::vector<double>> by_k;
  for (const auto& r : rows) by_k[r.corruption_count].push_back(r.score);
  std::vector<ScalingPoint> out;
  for (const auto& [k, scores] : by_k) {
    ScalingPoint p;
    p.k = k;
    p.n = scores.size();
    double s = 0.0;
    for (double v : scores) s += v;
    p.rate = s / static_cast<double>(scores.size());
    p.ci = bootstrap_mean_ci(scores, 1000, seed + static_cast<std::uint64_t>(k));
    out.push_back(p);
  }
  return out;
}

}  // namespace breakpoint
