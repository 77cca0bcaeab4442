#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoint/repo_model.hpp"

namespace breakpoint {

enum class Direction { Out, In };

/// Breadth-first distances from `source` along (Out) or against (In) edges.
/// Unreachable nodes, and the source itself, are absent.
std::map<std::string, std::size_t> shortest_paths(const CallGraph& g, std::string_view source,
                                                  Direction direction);

/// Dense variant: SIZE_MAX marks unreachable, dist[source] == 0.
std::vector<std::size_t> bfs_distances(const CallGraph& g, std::size_t source, Direction direction);

/// Sum of 1/d over nodes reachable from (Out) or reaching (In) `f`, divided by
/// |V|-1 when normalized. A single-node graph gives 0.
double harmonic_centrality(const CallGraph& g, std::string_view f, Direction direction = Direction::Out,
                           bool normalized = true);
double harmonic_centrality(const CallGraph& g, std::size_t f, Direction direction = Direction::Out,
                           bool normalized = true);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;  // L1 change between sweeps
  int max_iter = 200;
};

/// Power iteration; dangling mass is spread uniformly over all nodes.
/// Throws Error(NonConvergence) with the final residual.
std::vector<double> pagerank(const CallGraph& g, const PageRankOptions& options = {});

/// Sum of alpha^d over nodes reachable from `f` (excluding f).
double distance_discount(const CallGraph& g, std::string_view f, double alpha = 0.5);
double distance_discount(const CallGraph& g, std::size_t f, double alpha = 0.5);

/// Directed, unnormalized betweenness of every node (Brandes).
std::vector<double> betweenness_all(const CallGraph& g);
double betweenness(const CallGraph& g, std::string_view f);

struct Degrees {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t total = 0;
  friend bool operator==(const Degrees&, const Degrees&) = default;
};

Degrees degrees(const CallGraph& g, std::string_view f);
Degrees degrees(const CallGraph& g, std::size_t f);

/// All centrality columns for every node, computed in one pass.
struct Centrality {
  std::vector<double> pagerank;
  std::vector<double> harmonic;     // out-direction, normalized
  std::vector<double> harmonic_in;  // in-direction, unnormalized
  std::vector<double> distance_discount;
  std::vector<double> betweenness;
  std::vector<Degrees> degrees;
};

Centrality compute_centrality(const CallGraph& g, const PageRankOptions& pr = {}, double alpha = 0.5);

}  // namespace breakpoint
