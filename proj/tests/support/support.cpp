#include "support.hpp"

#include <stdlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "breakpoint/digest.hpp"
#include "breakpoint/taskgen.hpp"

namespace bptest {

TempDir::TempDir() {
  std::string templ = (std::filesystem::temp_directory_path() / "bp-test-XXXXXX").string();
  if (mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

breakpoint::CallGraph random_graph(std::uint64_t seed, std::size_t max_nodes, double max_density) {
  std::mt19937_64 rng(seed);
  const std::size_t n = 1 + rng() % max_nodes;
  const double density = max_density * static_cast<double>(rng() % 1000) / 1000.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && static_cast<double>(rng() % 1000000) / 1000000.0 < density) edges.emplace_back(a, b);
    }
  }
  return breakpoint::CallGraph::from_edges(n, std::move(edges));
}

breakpoint::TaskInstance make_task(const breakpoint::Repository& repo, const breakpoint::SuiteReport& base,
                                   breakpoint::TaskMode mode, std::vector<breakpoint::Corruption> corruptions,
                                   int min_failing) {
  const auto v = breakpoint::validate_task(repo, corruptions, base, min_failing);
  if (!v.accepted) throw std::runtime_error("corruption rejected: " + v.reason);
  breakpoint::TaskInstance t;
  t.repo_ref = {repo.root.string(), repo.commit};
  t.mode = mode;
  t.corruptions = std::move(corruptions);
  t.failing_tests = v.failing_tests;
  t.task_id = breakpoint::compute_task_id(repo.commit, mode, t.corruptions);
  return t;
}

breakpoint::Corruption hackrepo_corruption(const breakpoint::Repository& repo) {
  breakpoint::Corruption c;
  c.target = "hackmath.py::_scale";
  c.method = breakpoint::CorruptionMethod::Adversarial;
  c.corrupted_body = "def _scale(x):\n    return x * 3\n";
  c.original_digest = breakpoint::content_digest(repo.at(c.target).text());
  return c;
}

}  // namespace bptest
