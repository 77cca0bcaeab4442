#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoint/harness.hpp"
#include "breakpoint/repo_model.hpp"
#include "breakpoint/task.hpp"

namespace breakpoint {

inline constexpr std::string_view kDeletionPlaceholder = "raise NotImplementedError";

/// Keeps the header and docstring of `target` and replaces the rest of the
/// body with a single placeholder raise. Classes are rejected with
/// Error(UnsupportedTarget).
Corruption delete_function(const Repository& repo, std::string_view target);

/// Reasons a candidate replacement for `original` is not a usable corruption:
/// it does not parse as one definition of the same name, changes the header,
/// adds comments, or is token-for-token the original. Empty when acceptable.
std::string check_candidate(const FunctionUnit& original, const std::string& candidate);

/// Single-token mutants of the unit body (operator swaps, negation flips,
/// off-by-one constants), in source order. Not all of them parse.
std::vector<std::string> mutation_candidates(const FunctionUnit& unit);

struct CorruptionFeedback {
  std::string candidate;
  std::string rejection;  // non-empty when the candidate was refused without running tests
  std::set<std::string> failing;
};

struct CorruptionContext {
  std::string target;
  std::string prompt;
  std::string original_text;
  int test_budget = 5;
  int max_tool_calls = 10;
};

/// Source of corruption candidates. The live implementation talks to a
/// language model; tests use scripted ones.
class CorruptionClient {
 public:
  virtual ~CorruptionClient() = default;
  /// Next candidate (full unit source), or nullopt to stop.
  virtual std::optional<std::string> propose(const CorruptionContext& ctx,
                                             const std::vector<CorruptionFeedback>& history) = 0;
};

/// Proposes mutation_candidates() in a seeded order and stops as soon as one
/// breaks at least `floor` tests.
class ScriptedCorruptionClient : public CorruptionClient {
 public:
  explicit ScriptedCorruptionClient(std::uint64_t seed, int floor = 2) : seed_(seed), floor_(floor) {}
  std::optional<std::string> propose(const CorruptionContext& ctx,
                                     const std::vector<CorruptionFeedback>& history) override;

 private:
  std::uint64_t seed_;
  int floor_;
  std::vector<std::string> queue_;
  std::size_t next_ = 0;
};

/// Returns the given candidates in order, ignoring feedback.
class FixedCorruptionClient : public CorruptionClient {
 public:
  explicit FixedCorruptionClient(std::vector<std::string> candidates) : candidates_(std::move(candidates)) {}
  std::optional<std::string> propose(const CorruptionContext& ctx,
                                     const std::vector<CorruptionFeedback>& history) override;

 private:
  std::vector<std::string> candidates_;
  std::size_t next_ = 0;
};

struct AdversarialOptions {
  int test_budget = 5;
  int max_tool_calls = 10;
  int floor = 2;  // tests a single corruption must break
  HarnessOptions harness;
};

struct AdversarialResult {
  Corruption corruption;
  std::set<std::string> failing;
  int suite_runs = 0;
  int proposals = 0;
};

/// Drives the corruption prompt loop for one target against a private
/// sandbox. The last candidate that broke at least `floor` previously passing
/// tests is kept. Throws Error(NoValidCorruption) when none did, and passes
/// client errors through as Error(ClientFailure).
AdversarialResult adversarial_corrupt(const Repository& repo, std::string_view target,
                                      const SuiteReport& baseline, CorruptionClient& client,
                                      const AdversarialOptions& options = {});

/// Test functions from test modules that (transitively) import the target's
/// module, those mentioning the target's name first; at most `limit`.
std::vector<std::string> relevant_test_excerpts(const Repository& repo, std::string_view target,
                                                std::size_t limit = 5);

/// The corruption prompt with every slot filled.
std::string render_corruption_prompt(const Repository& repo, std::string_view target, int test_budget,
                                     int max_tool_calls);

/// Deterministic Fisher-Yates with mt19937_64, stable across standard
/// library implementations.
void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

}  // namespace breakpoint
