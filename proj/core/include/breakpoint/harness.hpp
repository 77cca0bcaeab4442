#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoint/repo_model.hpp"

namespace breakpoint {

enum class TestStatus { Pass, Fail, Error, Skipped };
enum class SuiteExit { Completed, Timeout, Crashed };

std::string_view to_string(TestStatus s);
std::string_view to_string(SuiteExit e);

struct TestOutcome {
  std::string test_id;  // "<classname>::<name>" as the runner reports it
  TestStatus status = TestStatus::Pass;
  double duration = 0.0;
  std::string message;  // first line of the failure/error message, if any
};

struct SuiteReport {
  std::vector<TestOutcome> outcomes;  // sorted by test_id
  double wall_clock = 0.0;
  SuiteExit exit = SuiteExit::Completed;
  int exit_code = 0;
  std::string output_tail;

  const TestOutcome* find(std::string_view test_id) const;
  std::set<std::string> passing() const;
  /// Tests with status fail or error.
  std::set<std::string> failing() const;
};

/// Parses a JUnit XML document (pytest --junitxml flavour). Throws
/// Error(SchemaError) when the document is not JUnit XML.
std::vector<TestOutcome> parse_junit_xml(const std::string& xml);

/// pytest without bytecode caches; {report} is replaced with the report path.
inline constexpr std::string_view kDefaultTestCommand =
    "python3 -m pytest -q -p no:cacheprovider --continue-on-collection-errors --junitxml={report}";

struct HarnessOptions {
  double cap_seconds = 60.0;
  std::map<std::string, std::string> env;  // overrides on top of the inherited environment
};

/// Runs the suite inside `snapshot`, which must be a copy rather than the
/// original tree. A timeout is reported through `exit`, with whatever
/// outcomes the report file held; nonzero exit without a readable report is
/// `crashed`.
SuiteReport run_suite(const std::filesystem::path& snapshot, const std::string& test_command,
                      const HarnessOptions& options = {});

/// Private copy of a repository tree in a temporary directory, removed on
/// destruction. Version-control metadata and bytecode caches are not copied.
class Sandbox {
 public:
  explicit Sandbox(const std::filesystem::path& source);
  ~Sandbox();
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;

  const std::filesystem::path& root() const { return root_; }
  /// Scratch directory next to the copy (report files live here).
  const std::filesystem::path& scratch() const { return scratch_; }

  std::string read(std::string_view relative) const;
  void write(std::string_view relative, const std::string& text) const;

  /// Replaces the source lines of `unit` (as located in the current file
  /// text) with `text`. Returns the new file contents.
  std::string replace_unit(std::string_view unit_id, const std::string& text) const;

 private:
  std::filesystem::path base_;
  std::filesystem::path root_;
  std::filesystem::path scratch_;
};

/// Copies a source tree, skipping version-control metadata and bytecode
/// caches.
void copy_source_tree(const std::filesystem::path& from, const std::filesystem::path& to);

/// Digest over the relative paths and contents of every file in a tree,
/// skipping the same entries Sandbox does not copy.
std::string tree_digest(const std::filesystem::path& root);

/// Suite reports keyed by tree digest and test command. Test suites are
/// assumed deterministic; sessions that reach an already-seen tree state
/// reuse the stored report. Thread-safe.
class SuiteCache {
 public:
  std::optional<SuiteReport> find(const std::string& key) const;
  void store(const std::string& key, const SuiteReport& report);
  std::size_t size() const;
  std::size_t hits() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, SuiteReport> reports_;
  mutable std::size_t hits_ = 0;
};

/// run_suite through `cache` when it is non-null.
SuiteReport run_suite_cached(const std::filesystem::path& snapshot, const std::string& test_command,
                             const HarnessOptions& options, SuiteCache* cache);

/// Runs the suite on a fresh copy of the repository. Throws
/// Error(BaselineFailed) listing failing tests or the exit reason.
SuiteReport baseline(const Repository& repo, const HarnessOptions& options = {});

/// Tests passing in `before` that fail, error or are missing in `after`.
std::set<std::string> failing_diff(const SuiteReport& before, const SuiteReport& after);

/// Test command with the report slot filled and shell-quoted.
std::string render_test_command(const std::string& command, const std::filesystem::path& report);

/// Locates `unit_id` in `source` and returns it with `text` substituted for
/// its lines. Throws Error(UnknownUnit).
std::string splice_unit(std::string_view path, const std::string& source, std::string_view unit_id,
                        const std::string& text);

}  // namespace breakpoint
