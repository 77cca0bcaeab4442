#include "breakpoint/graph_metrics.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>

#include "breakpoint/error.hpp"

namespace breakpoint {

std::vector<std::size_t> bfs_distances(const CallGraph& g, std::size_t source, Direction direction) {
  if (source >= g.size()) throw Error(Errc::UnknownNode, "node index out of range");
  std::vector<std::size_t> dist(g.size(), SIZE_MAX);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const auto& next = direction == Direction::Out ? g.successors(v) : g.predecessors(v);
    for (std::size_t w : next) {
      if (dist[w] == SIZE_MAX) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::map<std::string, std::size_t> shortest_paths(const CallGraph& g, std::string_view source,
                                                  Direction direction) {
  const std::size_t s = g.index_of(source);
  const auto dist = bfs_distances(g, s, direction);
  std::map<std::string, std::size_t> out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v != s && dist[v] != SIZE_MAX) out.emplace(g.nodes()[v], dist[v]);
  }
  return out;
}

double harmonic_centrality(const CallGraph& g, std::size_t f, Direction direction, bool normalized) {
  const auto dist = bfs_distances(g, f, direction);
  double sum = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v != f && dist[v] != SIZE_MAX) sum += 1.0 / static_cast<double>(dist[v]);
  }
  if (!normalized) return sum;
  if (g.size() < 2) return 0.0;
  return sum / static_cast<double>(g.size() - 1);
}

double harmonic_centrality(const CallGraph& g, std::string_view f, Direction direction, bool normalized) {
  return harmonic_centrality(g, g.index_of(f), direction, normalized);
}

std::vector<double> pagerank(const CallGraph& g, const PageRankOptions& options) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n);
  std::vector<double> next(n);
  double residual = 0.0;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.successors(v).empty()) dangling += rank[v];
    }
    const double base = (1.0 - options.damping) * inv_n + options.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t v = 0; v < n; ++v) {
      const auto& out = g.successors(v);
      if (out.empty()) continue;
      const double share = options.damping * rank[v] / static_cast<double>(out.size());
      for (std::size_t w : out) next[w] += share;
    }
    residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) residual += std::abs(next[v] - rank[v]);
    rank.swap(next);
    if (residual < options.tol) return rank;
  }
  std::ostringstream msg;
  msg << "pagerank did not converge in " << options.max_iter << " iterations (residual " << residual << ")";
  throw Error(Errc::NonConvergence, msg.str());
}

double distance_discount(const CallGraph& g, std::size_t f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  const auto dist = bfs_distances(g, f, Direction::Out);
  double sum = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v != f && dist[v] != SIZE_MAX) sum += std::pow(alpha, static_cast<double>(dist[v]));
  }
  return sum;
}

double distance_discount(const CallGraph& g, std::string_view f, double alpha) {
  return distance_discount(g, g.index_of(f), alpha);
}

std::vector<double> betweenness_all(const CallGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> bc(n, 0.0);
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    order.clear();
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), SIZE_MAX);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::size_t w : g.successors(v)) {
        if (dist[w] == SIZE_MAX) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  return bc;
}

double betweenness(const CallGraph& g, std::string_view f) { return betweenness_all(g)[g.index_of(f)]; }

Degrees degrees(const CallGraph& g, std::size_t f) {
  if (f >= g.size()) throw Error(Errc::UnknownNode, "node index out of range");
  Degrees d;
  d.in = g.predecessors(f).size();
  d.out = g.successors(f).size();
  d.total = d.in + d.out;
  return d;
}

Degrees degrees(const CallGraph& g, std::string_view f) { return degrees(g, g.index_of(f)); }

Centrality compute_centrality(const CallGraph& g, const PageRankOptions& pr, double alpha) {
  Centrality c;
  const std::size_t n = g.size();
  c.pagerank = pagerank(g, pr);
  c.betweenness = betweenness_all(g);
  c.harmonic.resize(n);
  c.harmonic_in.resize(n);
  c.distance_discount.resize(n);
  c.degrees.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    c.harmonic[v] = harmonic_centrality(g, v, Direction::Out, true);
    c.harmonic_in[v] = harmonic_centrality(g, v, Direction::In, false);
    c.distance_discount[v] = distance_discount(g, v, alpha);
    c.degrees[v] = degrees(g, v);
  }
  return c;
}

}  // namespace breakpoint
