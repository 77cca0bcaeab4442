#include <cmath>
#include <numeric>
#include <random>

#include "breakpoint/error.hpp"
#include "breakpoint/graph_metrics.hpp"
#include "doctest.h"
#include "graph_oracles.hpp"
#include "support.hpp"

using namespace breakpoint;
namespace oracle = bptest::oracle;

namespace {

CallGraph chain(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return CallGraph::from_edges(n, e);
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("chain of four") {
  const CallGraph g = chain(4);
  CHECK(harmonic_centrality(g, "n0") == doctest::Approx((1.0 + 0.5 + 1.0 / 3) / 3));
  CHECK(harmonic_centrality(g, "n3") == 0.0);
  CHECK(harmonic_centrality(g, "n3", Direction::In, false) == doctest::Approx(1.0 + 0.5 + 1.0 / 3));
  CHECK(distance_discount(g, "n0", 0.5) == doctest::Approx(0.5 + 0.25 + 0.125));
  const auto bc = betweenness_all(g);
  CHECK(bc == std::vector<double>{0.0, 2.0, 2.0, 0.0});
  CHECK(degrees(g, "n1") == Degrees{1, 1, 2});
}

TEST_CASE("diamond splits betweenness") {
  const CallGraph g = CallGraph::from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const auto bc = betweenness_all(g);
  CHECK(bc[1] == doctest::Approx(0.5));
  CHECK(bc[2] == doctest::Approx(0.5));
  CHECK(bc[0] == 0.0);
}

TEST_CASE("degenerate graphs") {
  CHECK(pagerank(CallGraph{}).empty());
  const CallGraph one = CallGraph::from_edges(1, {});
  CHECK(harmonic_centrality(one, "n0") == 0.0);
  CHECK(pagerank(one) == std::vector<double>{1.0});
  CHECK_THROWS_AS(harmonic_centrality(one, "missing"), Error);
}

TEST_CASE("shortest_paths omits source and unreachable nodes") {
  const CallGraph g = CallGraph::from_edges(4, {{0, 1}, {1, 2}});
  const auto d = shortest_paths(g, "n0", Direction::Out);
  CHECK(d.size() == 2);
  CHECK(d.at("n2") == 2);
  CHECK(shortest_paths(g, "n2", Direction::In).at("n0") == 2);
}

TEST_CASE("pagerank non-convergence is reported") {
  PageRankOptions opts;
  opts.max_iter = 1;
  opts.tol = 0.0;
  try {
    pagerank(chain(10), opts);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonConvergence);
  }
}

TEST_CASE("random digraphs agree with brute-force oracles") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    const CallGraph g = bptest::random_graph(seed);
    const Centrality c = compute_centrality(g);
    check_close(c.harmonic, oracle::harmonic_out(g), 1e-8);
    check_close(c.harmonic_in, oracle::harmonic_in(g), 1e-8);
    check_close(c.distance_discount, oracle::distance_discount(g, 0.5), 1e-8);
    check_close(c.pagerank, oracle::pagerank(g), 1e-8);
    check_close(c.betweenness, oracle::betweenness(g), 1e-8);
    const auto in = oracle::in_degree(g);
    const auto out = oracle::out_degree(g);
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(c.degrees[v] == Degrees{in[v], out[v], in[v] + out[v]});
    }
  }
}

TEST_CASE("pagerank is a distribution") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto pr = pagerank(bptest::random_graph(seed));
    CHECK(std::accumulate(pr.begin(), pr.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : pr) CHECK(v > 0.0);
  }
}

TEST_CASE("harmonic centrality is bounded by 1 when normalized") {
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    const CallGraph g = bptest::random_graph(seed, 30, 0.5);
    for (std::size_t v = 0; v < g.size(); ++v) {
      const double h = harmonic_centrality(g, v);
      CHECK(h >= 0.0);
      CHECK(h <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("an isolated node changes nothing but the normalization") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CAPTURE(seed);
    const CallGraph g = bptest::random_graph(seed, 20, 0.3);
    const CallGraph h = CallGraph::from_edges(g.size() + 1, g.edges());
    const Centrality a = compute_centrality(g);
    const Centrality b = compute_centrality(h);
    const double n = static_cast<double>(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(a.degrees[v] == b.degrees[v]);
      CHECK(a.distance_discount[v] == doctest::Approx(b.distance_discount[v]).epsilon(1e-12));
      CHECK(a.betweenness[v] == doctest::Approx(b.betweenness[v]).epsilon(1e-12));
      if (g.size() > 1) CHECK(b.harmonic[v] == doctest::Approx(a.harmonic[v] * (n - 1) / n).epsilon(1e-12));
    }
  }
}

TEST_CASE("pagerank floor") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const CallGraph g = bptest::random_graph(seed);
    const auto pr = pagerank(g);
    const double floor = 0.15 / static_cast<double>(g.size()) - 1e-12;
    for (double p : pr) CHECK(p >= floor);
  }
}

TEST_CASE("harmonic and distance discount grow with edges") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const CallGraph g = bptest::random_graph(seed, 15, 0.25);
    if (g.size() < 2) continue;
    auto edges = g.edges();
    const std::size_t a = rng() % g.size();
    std::size_t b = rng() % g.size();
    if (b == a) b = (b + 1) % g.size();
    edges.emplace_back(a, b);
    const CallGraph h = CallGraph::from_edges(g.size(), edges);
    const auto hg = oracle::harmonic_out(g);
    const auto hh = oracle::harmonic_out(h);
    const auto dg = oracle::distance_discount(g, 0.5);
    const auto dh = oracle::distance_discount(h, 0.5);
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(harmonic_centrality(h, v) >= harmonic_centrality(g, v) - 1e-12);
      CHECK(distance_discount(h, v) >= distance_discount(g, v) - 1e-12);
      CHECK(harmonic_centrality(h, v) == doctest::Approx(hh[v]).epsilon(1e-10));
      CHECK(harmonic_centrality(g, v) == doctest::Approx(hg[v]).epsilon(1e-10));
      CHECK(distance_discount(h, v) == doctest::Approx(dh[v]).epsilon(1e-10));
      CHECK(distance_discount(g, v) == doctest::Approx(dg[v]).epsilon(1e-10));
    }
  }
}
