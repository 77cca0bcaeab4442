#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/python/source_units.hpp"

namespace breakpoint {

struct Span {
  int start = 0;  // 1-based, inclusive
  int end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

/// One parsed callable of the analyzed corpus. signature + docstring + body
/// reproduces the unit's source lines byte-for-byte.
struct FunctionUnit {
  std::string id;  // "<relative path>::<qualified name>"
  UnitKind kind = UnitKind::Function;
  std::string signature;
  std::string docstring;
  std::string body;
  Span span;

  std::string text() const { return signature + docstring + body; }
  std::string_view file() const;
  std::string_view qualname() const;
  /// Last component of the qualified name, without any "#n" suffix.
  std::string_view name() const;
};

std::string make_unit_id(std::string_view file, std::string_view qualname);
/// Splits "path::qualname"; throws Error(UnknownUnit) on malformed ids.
std::pair<std::string, std::string> split_unit_id(std::string_view id);

struct SourceFile {
  std::string path;  // relative, '/'-separated
  std::string text;
};

struct IngestOptions {
  /// Test modules (tests/ directories, test_*.py, *_test.py, conftest.py) are
  /// part of the suite rather than the code under study; they are skipped
  /// unless this is set.
  bool include_tests = false;
};

struct Repository {
  std::filesystem::path root;
  std::string commit = "unversioned";
  std::string test_command;
  std::vector<FunctionUnit> units;  // file order, then order of appearance
  std::vector<SourceFile> sources;  // successfully parsed files, sorted by path
  nlohmann::json metadata = nlohmann::json::object();

  const FunctionUnit* find(std::string_view id) const;
  const FunctionUnit& at(std::string_view id) const;  // throws Error(UnknownUnit)
};

bool is_test_path(std::string_view relative_path);

/// Dotted module name of a relative source path ("pkg/__init__.py" -> "pkg").
std::string module_name_of(std::string_view path);

/// Python sources under `root`, relative and sorted; skips hidden directories,
/// caches and virtual environments.
std::vector<std::string> list_python_files(const std::filesystem::path& root);

Repository ingest_repository(const std::filesystem::path& root, std::string test_command,
                             const IngestOptions& options = {});

/// Units of a single module, as they appear in `source`.
std::vector<FunctionUnit> units_of_source(std::string_view path, const std::string& source);

/// Directed graph over unit ids, with dense indices for the metric kernels.
class CallGraph {
 public:
  CallGraph() = default;
  CallGraph(std::vector<std::string> nodes, std::vector<std::pair<std::size_t, std::size_t>> edges,
            std::vector<std::pair<std::string, std::string>> unresolved = {});

  /// Anonymous graph "n0".."n{count-1}", for tests and benchmarks.
  static CallGraph from_edges(std::size_t count, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<std::pair<std::string, std::string>>& unresolved() const { return unresolved_; }
  const std::vector<std::size_t>& successors(std::size_t v) const { return out_[v]; }
  const std::vector<std::size_t>& predecessors(std::size_t v) const { return in_[v]; }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws Error(UnknownNode)
  bool has_edge(std::string_view from, std::string_view to) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::pair<std::string, std::string>> unresolved_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// Static two-pass name resolution over the repository's units.
CallGraph build_call_graph(const Repository& repo);

/// Undirected shortest-path length; nullopt when disconnected.
std::optional<std::size_t> chain_distance(const CallGraph& g, std::string_view a, std::string_view b);
std::optional<std::size_t> chain_distance(const CallGraph& g, std::size_t a, std::size_t b);

/// "repo.snapshot.json" document (schema_version 1).
nlohmann::json snapshot_json(const Repository& repo, const CallGraph& graph);
/// Rebuilds the call graph stored in a snapshot document.
CallGraph call_graph_from_snapshot(const nlohmann::json& snapshot);

}  // namespace breakpoint
