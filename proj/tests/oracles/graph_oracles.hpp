#pragma once

// Brute-force reference values for the call-graph centralities, computed
// along routes that share no code with the library: Floyd-Warshall
// distances, an explicit Google matrix, and enumeration of every shortest
// path.

#include <cstddef>
#include <vector>

#include "breakpoint/repo_model.hpp"

namespace bptest::oracle {

inline constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1);

std::vector<std::vector<std::size_t>> all_pairs(const breakpoint::CallGraph& g);

std::vector<double> harmonic_out(const breakpoint::CallGraph& g);  // divided by n - 1
std::vector<double> harmonic_in(const breakpoint::CallGraph& g);   // raw sum
std::vector<double> distance_discount(const breakpoint::CallGraph& g, double alpha);
std::vector<double> pagerank(const breakpoint::CallGraph& g, double damping = 0.85);
std::vector<double> betweenness(const breakpoint::CallGraph& g);
std::vector<std::size_t> in_degree(const breakpoint::CallGraph& g);
std::vector<std::size_t> out_degree(const breakpoint::CallGraph& g);

}  // namespace bptest::oracle
