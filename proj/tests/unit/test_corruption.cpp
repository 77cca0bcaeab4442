#include <algorithm>

#include "breakpoint/corruption.hpp"
#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/prompts.hpp"
#include "breakpoint/python/source_units.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace breakpoint;

namespace {

const std::string kCommand(kDefaultTestCommand);

Repository minirepo() { return ingest_repository(bptest::fixtures() / "minirepo", kCommand); }

FunctionUnit unit(const std::string& source, std::string_view qualname = "f") {
  for (auto& u : units_of_source("m.py", source)) {
    if (u.qualname() == qualname) return u;
  }
  FAIL("unit not found");
  return {};
}

class ThrowingClient : public CorruptionClient {
 public:
  std::optional<std::string> propose(const CorruptionContext&, const std::vector<CorruptionFeedback>&) override {
    throw std::runtime_error("network down");
  }
};

}  // namespace

TEST_CASE("deletion keeps header and docstring") {
  const Repository repo = minirepo();
  const Corruption c = delete_function(repo, "arith.py::clamp");
  CHECK(c.method == CorruptionMethod::Deletion);
  CHECK(c.corrupted_body ==
        "def clamp(x, lo, hi):\n    \"\"\"Clamp x into [lo, hi].\"\"\"\n    raise NotImplementedError\n");
  CHECK(c.original_digest == content_digest(repo.at("arith.py::clamp").text()));
  CHECK(delete_function(repo, "arith.py::add").corrupted_body == "def add(a, b):\n    raise NotImplementedError\n");
}

TEST_CASE("deletion of one-liners and classes") {
  bptest::TempDir dir;
  bptest::spit(dir.path() / "m.py", "def f(x): return x\n\nclass K:\n    def m(self):\n        return 1\n");
  const Repository repo = ingest_repository(dir.path(), "true");
  CHECK(delete_function(repo, "m.py::f").corrupted_body == "def f(x): raise NotImplementedError\n");
  CHECK(delete_function(repo, "m.py::K.m").corrupted_body == "    def m(self):\n        raise NotImplementedError\n");
  try {
    delete_function(repo, "m.py::K");
    FAIL("expected UnsupportedTarget");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedTarget);
  }
}

TEST_CASE("candidate checks") {
  const FunctionUnit u = unit("def f(a, b):\n    # keep\n    return a + b\n");
  CHECK(check_candidate(u, "def f(a, b):\n    # keep\n    return a - b\n").empty());
  CHECK(check_candidate(u, "def f(a, b):\n    return a - b\n").empty());
  CHECK(check_candidate(u, "def f(a, b):\n    return a+b  # same tokens\n") == "identical to the original");
  CHECK(check_candidate(u, "def f(a, c):\n    return a - c\n") == "the definition line changed");
  CHECK(check_candidate(u, "def f(a, b):\n    return a - b  # bug here\n") == "adds comments");
  CHECK_FALSE(check_candidate(u, "def g(a, b):\n    return a - b\n").empty());
  CHECK_FALSE(check_candidate(u, "def f(a, b):\n    return (a -\n").empty());
}

TEST_CASE("mutation candidates") {
  const FunctionUnit u = unit("def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 3:\n        return x + 1\n    return True\n");
  const auto muts = mutation_candidates(u);
  const std::vector<std::string> want = {
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if x < 3:\n        return x + 1\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x <= 3:\n        return x + 1\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 4:\n        return x + 1\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 2:\n        return x + 1\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 3:\n        return x - 1\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 3:\n        return x + 2\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 3:\n        return x + 0\n    return True\n",
      "def f(x):\n    \"\"\"x + 1\"\"\"\n    if not x < 3:\n        return x + 1\n    return False\n",
  };
  CHECK(muts == want);
  for (const auto& m : muts) CHECK(check_candidate(u, m).empty());
}

TEST_CASE("seeded shuffle and seed mixing") {
  std::vector<std::string> a = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<std::string> b = a;
  seeded_shuffle(a, 11);
  seeded_shuffle(b, 11);
  CHECK(a == b);
  std::vector<std::string> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::string>{"a", "b", "c", "d", "e", "f", "g"});
  CHECK(mix_seed(1, "x") == mix_seed(1, "x"));
  CHECK(mix_seed(1, "x") != mix_seed(2, "x"));
  CHECK(mix_seed(1, "x") != mix_seed(1, "y"));
}

TEST_CASE("templates") {
  CHECK(template_slots(solver_remove_template()) ==
        std::vector<std::string>{"repo_name", "target", "failing_count", "failing_tests", "max_tool_uses",
                                 "max_attempts"});
  const std::string t = "#! slots: {a}\n\nx={a} y={b}\n";
  CHECK(render_template(t, {{"a", "1"}}) == "x=1 y={b}\n");
  CHECK_THROWS_AS(render_template(t, {}), Error);
}

TEST_CASE("corruption prompt") {
  const Repository repo = minirepo();
  const std::string p = render_corruption_prompt(repo, "arith.py::gcd", 5, 10);
  CHECK(p.find("arith.py") != std::string::npos);
  CHECK(p.find("def gcd(a, b):") != std::string::npos);
  CHECK(p.find("test_gcd") != std::string::npos);
  CHECK(p.find("{func_code}") == std::string::npos);
  CHECK(p.find("#!") == std::string::npos);
  const auto ex = relevant_test_excerpts(repo, "arith.py::gcd", 3);
  REQUIRE(ex.size() == 3);
  for (const auto& e : ex) CHECK(e.find("gcd") != std::string::npos);
}

TEST_CASE("adversarial loop with the scripted client") {
  // gcd has no swappable operator, so the scripted client gives up at once.
  CHECK(mutation_candidates(minirepo().at("arith.py::gcd")).empty());
  const Repository repo = minirepo();
  const SuiteReport base = baseline(repo);
  ScriptedCorruptionClient client(3);
  const AdversarialResult r = adversarial_corrupt(repo, "arith.py::add", base, client);
  CHECK(r.corruption.method == CorruptionMethod::Adversarial);
  CHECK(r.failing.size() >= 2);
  CHECK(r.suite_runs <= 5);
  CHECK(check_candidate(repo.at("arith.py::add"), r.corruption.corrupted_body).empty());
  ScriptedCorruptionClient again(3);
  CHECK(adversarial_corrupt(repo, "arith.py::add", base, again).corruption.corrupted_body ==
        r.corruption.corrupted_body);
}

TEST_CASE("rejected candidates cost no suite run") {
  const Repository repo = minirepo();
  const SuiteReport base = baseline(repo);
  FixedCorruptionClient client({"def add(a, b):\n    return a+b\n", "def add(a, b):\n    return a - b  # here\n",
                                "def add(a, b):\n    return a - b\n"});
  const AdversarialResult r = adversarial_corrupt(repo, "arith.py::add", base, client);
  CHECK(r.proposals == 3);
  CHECK(r.suite_runs == 1);
  CHECK(r.corruption.corrupted_body == "def add(a, b):\n    return a - b\n");
}

TEST_CASE("no valid corruption and client failures") {
  const Repository repo = minirepo();
  const SuiteReport base = baseline(repo);
  FixedCorruptionClient weak({"def add(a, b):\n    return b + a\n"});
  try {
    adversarial_corrupt(repo, "arith.py::add", base, weak);
    FAIL("expected NoValidCorruption");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoValidCorruption);
  }
  ThrowingClient broken;
  try {
    adversarial_corrupt(repo, "arith.py::add", base, broken);
    FAIL("expected ClientFailure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ClientFailure);
  }
}
