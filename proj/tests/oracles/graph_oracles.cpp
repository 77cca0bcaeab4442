#include "graph_oracles.hpp"

#include <cmath>
#include <functional>

namespace bptest::oracle {
namespace {

std::vector<std::vector<bool>> adjacency(const breakpoint::CallGraph& g) {
  std::vector<std::vector<bool>> a(g.size(), std::vector<bool>(g.size(), false));
  for (const auto& [from, to] : g.edges()) a[from][to] = true;
  return a;
}

}  // namespace

std::vector<std::vector<std::size_t>> all_pairs(const breakpoint::CallGraph& g) {
  const std::size_t n = g.size();
  const auto a = adjacency(g);
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kUnreachable));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (a[i][j]) d[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kUnreachable) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[k][j] == kUnreachable) continue;
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

std::vector<double> harmonic_out(const breakpoint::CallGraph& g) {
  const auto d = all_pairs(g);
  const std::size_t n = g.size();
  std::vector<double> h(n, 0.0);
  if (n < 2) return h;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && d[i][j] != kUnreachable) h[i] += 1.0 / static_cast<double>(d[i][j]);
    }
    h[i] /= static_cast<double>(n - 1);
  }
  return h;
}

std::vector<double> harmonic_in(const breakpoint::CallGraph& g) {
  const auto d = all_pairs(g);
  const std::size_t n = g.size();
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && d[j][i] != kUnreachable) h[i] += 1.0 / static_cast<double>(d[j][i]);
    }
  }
  return h;
}

std::vector<double> distance_discount(const breakpoint::CallGraph& g, double alpha) {
  const auto d = all_pairs(g);
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && d[i][j] != kUnreachable) out[i] += std::pow(alpha, static_cast<double>(d[i][j]));
    }
  }
  return out;
}

std::vector<double> pagerank(const breakpoint::CallGraph& g, double damping) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  const auto a = adjacency(g);
  // Column-stochastic Google matrix: column j spreads j's rank.
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < n; ++i) out += a[j][i] ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double follow = out == 0 ? 1.0 / static_cast<double>(n) : (a[j][i] ? 1.0 / static_cast<double>(out) : 0.0);
      m[i][j] = damping * follow + (1.0 - damping) / static_cast<double>(n);
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 10000; ++iter) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) y[i] += m[i][j] * x[j];
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(y[i] - x[i]);
    x = std::move(y);
    if (diff < 1e-15) break;
  }
  return x;
}

std::vector<double> betweenness(const breakpoint::CallGraph& g) {
  const std::size_t n = g.size();
  const auto d = all_pairs(g);
  const auto a = adjacency(g);
  std::vector<double> bc(n, 0.0);
  std::vector<std::size_t> path;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t || d[s][t] == kUnreachable) continue;
      // Every shortest s-t path, listed explicitly.
      std::vector<std::vector<std::size_t>> paths;
      path.assign(1, s);
      std::function<void(std::size_t)> walk = [&](std::size_t v) {
        if (v == t) {
          paths.push_back(path);
          return;
        }
        for (std::size_t w = 0; w < n; ++w) {
          if (a[v][w] && d[s][w] == d[s][v] + 1 && d[w][t] != kUnreachable && d[s][w] + d[w][t] == d[s][t]) {
            path.push_back(w);
            walk(w);
            path.pop_back();
          }
        }
      };
      walk(s);
      for (const auto& p : paths) {
        for (std::size_t k = 1; k + 1 < p.size(); ++k) bc[p[k]] += 1.0 / static_cast<double>(paths.size());
      }
    }
  }
  return bc;
}

std::vector<std::size_t> in_degree(const breakpoint::CallGraph& g) {
  const auto a = adjacency(g);
  std::vector<std::size_t> deg(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) deg[j] += a[i][j] ? 1 : 0;
  }
  return deg;
}

std::vector<std::size_t> out_degree(const breakpoint::CallGraph& g) {
  const auto a = adjacency(g);
  std::vector<std::size_t> deg(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) deg[i] += a[i][j] ? 1 : 0;
  }
  return deg;
}

}  // namespace bptest::oracle
