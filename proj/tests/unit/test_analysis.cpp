#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "breakpoint/analysis.hpp"
#include "breakpoint/error.hpp"
#include "doctest.h"
#include "stats_oracles.hpp"

using namespace breakpoint;

namespace {

double sigmoid(double e) { return 1.0 / (1.0 + std::exp(-e)); }

Trajectory trajectory(const std::string& label, TaskMode mode, int attempts, std::optional<int> solved) {
  Trajectory t;
  t.label = label;
  t.mode = mode;
  t.budget = {16, attempts};
  t.score = solved ? 1 : 0;
  t.solved_at_attempt = solved;
  t.used_attempts = solved ? *solved : attempts;
  return t;
}

}  // namespace

TEST_CASE("intercept-only AIC on balanced data") {
  FitOptions o;
  o.min_rows = 4;
  const LogisticFit fit = fit_logistic({{}, {}, {}, {}}, {0, 1, 0, 1}, {}, o);
  CHECK(std::abs(fit.aic - (2.0 - 8.0 * std::log(0.5))) <= 1e-9);
  CHECK(std::abs(fit.coefficients[0].beta) <= 1e-12);
  CHECK(fit.converged);
  CHECK(fit.mcfadden_r2 == doctest::Approx(0.0));
}

TEST_CASE("coefficient recovery at n = 2000") {
  const std::vector<double> truth = {0.5, -1.2, 0.4};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 2000; ++i) {
    const double a = normal(rng);
    const double b = normal(rng);
    x.push_back({a, b});
    y.push_back(unif(rng) < sigmoid(truth[0] + truth[1] * a + truth[2] * b) ? 1 : 0);
  }
  const LogisticFit fit = fit_logistic(x, y, {"a", "b"});
  CHECK(fit.converged);
  CHECK_FALSE(fit.separation);
  const auto oracle = bptest::oracle::logistic_newton(x, y);
  for (std::size_t j = 0; j < 3; ++j) {
    CAPTURE(j);
    const Coefficient& c = fit.coefficients[j];
    CHECK(std::abs(c.beta - truth[j]) <= 3.0 * c.se);
    CHECK(c.beta == doctest::Approx(oracle[j]).epsilon(1e-8));
    CHECK(c.odds_ratio() == doctest::Approx(std::exp(c.beta)));
  }
  CHECK(fit.coefficients[1].name == "a");
  CHECK(fit.linear_predictor({1.0, 0.0}) == doctest::Approx(fit.coefficients[0].beta + fit.coefficients[1].beta));
  CHECK(fit.to_json().at("coefficients").size() == 3);
}

TEST_CASE("fit failures") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back({static_cast<double>(i), 2.0 * i});
    y.push_back(i % 3 == 0);
  }
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  CHECK(code([&] { fit_logistic(x, y, {"a", "b"}); }) == Errc::RankDeficient);
  CHECK(code([&] { fit_logistic(x, std::vector<int>(20, 1), {"a", "b"}); }) == Errc::DegenerateOutcomes);
  std::vector<std::vector<double>> few(x.begin(), x.begin() + 5);
  CHECK(code([&] { fit_logistic(few, {0, 1, 0, 1, 0}, {"a", "b"}); }) == Errc::TooFewRecords);
  std::vector<std::vector<double>> one;
  std::vector<int> sep;
  for (int i = 0; i < 20; ++i) {
    one.push_back({static_cast<double>(i)});
    sep.push_back(i >= 10);
  }
  const LogisticFit fit = fit_logistic(one, sep, {"a"});
  CHECK(fit.separation);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("mann-whitney exact p matches enumeration") {
  std::mt19937_64 rng(8);
  for (std::size_t n1 = 1; n1 <= 8; ++n1) {
    for (std::size_t n2 = 1; n2 <= 8; ++n2) {
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> pool(n1 + n2);
        std::iota(pool.begin(), pool.end(), 1.0);
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::vector<double> a(pool.begin(), pool.begin() + static_cast<long>(n1));
        const std::vector<double> b(pool.begin() + static_cast<long>(n1), pool.end());
        const MannWhitney mw = mann_whitney(a, b);
        double u = 0.0;
        for (double ai : a) {
          for (double bj : b) u += ai > bj ? 1.0 : 0.0;
        }
        CAPTURE(n1);
        CAPTURE(n2);
        CHECK(mw.exact);
        CHECK(mw.u == u);
        CHECK(std::abs(mw.p - bptest::oracle::mann_whitney_enumerated(n1, n2, u)) <= 1e-12);
        CHECK(mw.r == doctest::Approx(1.0 - 2.0 * u / static_cast<double>(n1 * n2)));
      }
    }
  }
}

TEST_CASE("mann-whitney approximation and symmetry") {
  const std::vector<double> a = {1, 2, 2, 3, 4, 5, 5, 6};
  const std::vector<double> b = {3, 4, 4, 6, 7, 8, 9, 9, 10};
  const MannWhitney ab = mann_whitney(a, b);
  const MannWhitney ba = mann_whitney(b, a);
  CHECK_FALSE(ab.exact);
  CHECK(ab.u + ba.u == doctest::Approx(72.0));
  CHECK(ab.p == doctest::Approx(ba.p));
  CHECK(ab.r == doctest::Approx(-ba.r));
  CHECK(mann_whitney({1, 1}, {1, 1}).p == 1.0);
  CHECK_THROWS_AS(mann_whitney({}, {1}), Error);
}

TEST_CASE("cohens d") {
  CHECK(std::abs(cohens_d({1, 2, 3}, {3, 4, 5}) - (-2.0)) <= 1e-12);
  CHECK(cohens_d({3, 4, 5}, {1, 2, 3}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cohens_d({1}, {1, 2}), Error);
  CHECK_THROWS_AS(cohens_d({1, 1}, {2, 2}), Error);
}

TEST_CASE("pass@n is monotone and bounded") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Trajectory> ts;
    for (int i = 0; i < 30; ++i) {
      const int attempts = 1 + static_cast<int>(rng() % 8);
      const bool solved = rng() % 2 == 0;
      ts.push_back(trajectory("x", TaskMode::Remove, attempts,
                              solved ? std::optional<int>(1 + static_cast<int>(rng() % attempts)) : std::nullopt));
    }
    const auto curve = passn_curve(ts);
    for (std::size_t n = 1; n < curve.size(); ++n) CHECK(curve[n] >= curve[n - 1]);
    CHECK(curve.back() <= 1.0);
  }
  const auto c = passn_curve({trajectory("x", TaskMode::Remove, 4, 2), trajectory("x", TaskMode::Remove, 2, std::nullopt)});
  CHECK(c == std::vector<double>{0.0, 0.5, 0.5, 0.5});
  CHECK(passn_curve({}).empty());
}

TEST_CASE("results join tasks and trajectories") {
  TaskInstance task;
  task.task_id = "bp-1";
  task.mode = TaskMode::Discovery;
  for (const char* target : {"m.py::a", "m.py::b"}) {
    Corruption c;
    c.target = target;
    task.corruptions.push_back(c);
    TargetMetrics m;
    m.normalized.z.assign(metric_names().size(), 0.0);
    m.normalized.percentile.assign(metric_names().size(), 0.0);
    m.normalized.z[0] = target[6] == 'a' ? 1.0 : 3.0;
    m.normalized.percentile[0] = target[6] == 'a' ? 0.4 : 0.9;
    task.metrics.emplace(target, m);
  }
  Trajectory t = trajectory("agent", TaskMode::Discovery, 4, 3);
  t.task_id = "bp-1";
  TrajectoryEvent e;
  e.kind = "info";
  e.tool = "read_file";
  t.events = {e, e};
  Trajectory stray = t;
  stray.task_id = "bp-unknown";
  const auto rows = build_results({task}, {t, stray});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].z.at("loc") == 2.0);
  CHECK(rows[0].pct.at("loc") == 0.4);
  CHECK(rows[0].corruption_count == 2);
  CHECK(rows[0].predictor("corruptions") == 2.0);
  CHECK(rows[0].info_calls == 2);
  CHECK(rows[0].tool_counts.at("read_file") == 2);
  CHECK_THROWS_AS(rows[0].predictor("nope"), Error);
}

TEST_CASE("difficulty grid") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ResultRow> rows;
  for (int i = 0; i < 300; ++i) {
    ResultRow r;
    r.z["loc"] = normal(rng);
    r.z["harmonic"] = normal(rng);
    r.score = static_cast<double>(rng() % 1000) / 1000.0 < sigmoid(0.3 - r.z["loc"] - r.z["harmonic"]);
    rows.push_back(r);
  }
  const LogisticFit fit = fit_logistic(rows, {"loc", "harmonic"});
  const DifficultyGrid g = difficulty_grid(rows, "loc", "harmonic", 5, fit);
  CHECK(g.cells.size() == 25);
  int total = 0;
  for (const auto& c : g.cells) {
    total += c.count;
    if (c.count == 0) CHECK(std::isnan(c.rate()));
  }
  CHECK(total == 300);
  for (const auto& p : g.boundary) {
    if (p.level != "zero_logit") continue;
    CHECK(fit.linear_predictor({p.x, p.y}) == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK(std::count_if(g.boundary.begin(), g.boundary.end(), [](const BoundaryPoint& p) { return p.level == "p95"; }) == 6);
  CHECK_THROWS_AS(difficulty_grid(rows, "loc", "pagerank", 5, fit), Error);
}

TEST_CASE("telemetry and scaling") {
  std::vector<Trajectory> ts = {trajectory("a", TaskMode::Remove, 4, 1), trajectory("a", TaskMode::Remove, 4, std::nullopt),
                                trajectory("b", TaskMode::Discovery, 4, 2)};
  ts[0].events.resize(3);
  for (auto& e : ts[0].events) {
    e.kind = "info";
    e.tool = "search_code";
  }
  const auto tel = telemetry_summary(ts);
  REQUIRE(tel.size() == 2);
  CHECK(tel[0].label == "a");
  CHECK(tel[0].n == 2);
  CHECK(tel[0].mean_info_calls == 1.5);
  CHECK(tel[0].mean_submissions == 2.5);
  CHECK(tel[0].mean_tool_calls.at("search_code") == 1.5);

  std::vector<ResultRow> rows;
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 10; ++i) {
      ResultRow r;
      r.corruption_count = k;
      r.score = i < 10 - 3 * k;
      rows.push_back(r);
    }
  }
  const auto pts = success_by_corruptions(rows, 1);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].rate == doctest::Approx(0.7));
  CHECK(pts[2].rate == doctest::Approx(0.1));
  for (const auto& p : pts) {
    CHECK(p.ci.lo <= p.rate);
    CHECK(p.ci.hi >= p.rate);
  }
  const Interval ci = bootstrap_mean_ci({1, 2, 3, 4, 5}, 2000, 9);
  CHECK(ci.lo < 3.0);
  CHECK(ci.hi > 3.0);
  CHECK(ci.lo >= 1.0);
  CHECK(ci.hi <= 5.0);
}

TEST_CASE("rescaling leaves the tests unchanged") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 12; ++i) a.push_back(normal(rng));
  for (int i = 0; i < 15; ++i) b.push_back(normal(rng) + 0.8);
  auto affine = [](std::vector<double> v, double s, double t) {
    for (double& x : v) x = s * x + t;
    return v;
  };
  const MannWhitney base = mann_whitney(a, b);
  const double d = cohens_d(a, b);
  for (const auto& [s, t] : {std::pair{3.0, -2.0}, std::pair{0.01, 100.0}}) {
    const MannWhitney mw = mann_whitney(affine(a, s, t), affine(b, s, t));
    CHECK(mw.u == base.u);
    CHECK(mw.p == doctest::Approx(base.p));
    CHECK(mw.r == doctest::Approx(base.r));
    CHECK(cohens_d(affine(a, s, t), affine(b, s, t)) == doctest::Approx(d));
  }

  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> scaled;
  std::vector<int> y;
  for (int i = 0; i < 400; ++i) {
    const double p = normal(rng);
    const double q = normal(rng);
    x.push_back({p, q});
    scaled.push_back({5.0 * p + 1.0, q});
    y.push_back(unif(rng) < sigmoid(0.2 + 0.9 * p - 0.5 * q) ? 1 : 0);
  }
  const LogisticFit f1 = fit_logistic(x, y, {"p", "q"});
  const LogisticFit f2 = fit_logistic(scaled, y, {"p", "q"});
  for (std::size_t j = 1; j < 3; ++j) CHECK(f2.coefficients[j].z == doctest::Approx(f1.coefficients[j].z).epsilon(1e-6));
  CHECK(f2.aic == doctest::Approx(f1.aic));
}
