#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "breakpoint/harness.hpp"
#include "breakpoint/repo_model.hpp"
#include "breakpoint/task.hpp"

namespace bptest {

inline std::filesystem::path fixtures() { return BREAKPOINT_FIXTURES_DIR; }
inline std::filesystem::path golden() { return BREAKPOINT_GOLDEN_DIR; }

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, const std::string& text);

/// Seeded Erdos-Renyi style digraph without self loops.
breakpoint::CallGraph random_graph(std::uint64_t seed, std::size_t max_nodes = 50, double max_density = 0.15);

/// Task with the given corruptions, failing set taken from a validation run.
/// Throws when the corruptions break fewer than `min_failing` tests.
breakpoint::TaskInstance make_task(const breakpoint::Repository& repo, const breakpoint::SuiteReport& base,
                                   breakpoint::TaskMode mode, std::vector<breakpoint::Corruption> corruptions,
                                   int min_failing = 5);

/// Discovery task on the hackrepo fixture: `_scale` triples instead of
/// doubling, which breaks five `test_double` cases.
breakpoint::Corruption hackrepo_corruption(const breakpoint::Repository& repo);

}  // namespace bptest
