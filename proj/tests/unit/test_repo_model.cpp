#include <algorithm>
#include <set>

#include "breakpoint/error.hpp"
#include "breakpoint/repo_model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace breakpoint;

namespace {

// Small package exercising each resolution rule.
void write_resolution_repo(const std::filesystem::path& root) {
  bptest::spit(root / "pkg/__init__.py", "from .core import helper as exported\n");
  bptest::spit(root / "pkg/core.py",
               "import os\n"
               "\n"
               "LIMIT = 3\n"
               "\n"
               "def helper(x):\n"
               "    return os.path.join(x, 'a')\n"
               "\n"
               "def caller(x):\n"
               "    y = helper(x)\n"
               "    return len(y)\n"
               "\n"
               "def shadowed(helper):\n"
               "    return helper(1)\n"
               "\n"
               "class Base:\n"
               "    def ping(self):\n"
               "        return self.pong()\n"
               "\n"
               "    def pong(self):\n"
               "        return 1\n"
               "\n"
               "class Child(Base):\n"
               "    def pong(self):\n"
               "        return super().pong() + 1\n"
               "\n"
               "    @staticmethod\n"
               "    def make():\n"
               "        return Child()\n"
               "\n"
               "    def unique_name(self):\n"
               "        return 0\n");
  bptest::spit(root / "pkg/use.py",
               "from pkg import core\n"
               "from pkg.core import Base as B\n"
               "from . import exported\n"
               "\n"
               "def via_module():\n"
               "    return core.caller(1)\n"
               "\n"
               "def via_alias():\n"
               "    return B().ping()\n"
               "\n"
               "def via_reexport():\n"
               "    return exported(2)\n"
               "\n"
               "def via_class_attr():\n"
               "    return core.Child.make()\n"
               "\n"
               "def unknown_receiver(obj):\n"
               "    return obj.unique_name()\n"
               "\n"
               "def external():\n"
               "    import json\n"
               "    return json.dumps({}), missing()\n");
  bptest::spit(root / "tests/test_core.py", "def test_x():\n    assert True\n");
}

bool has(const CallGraph& g, const std::string& from, const std::string& to) { return g.has_edge(from, to); }

}  // namespace

TEST_CASE("unit ids") {
  CHECK(make_unit_id("a/b.py", "K.m") == "a/b.py::K.m");
  CHECK(split_unit_id("a/b.py::K.m") == std::pair<std::string, std::string>{"a/b.py", "K.m"});
  CHECK_THROWS_AS(split_unit_id("nocolons"), Error);
  FunctionUnit u;
  u.id = "a/b.py::K.m#2";
  CHECK(u.file() == "a/b.py");
  CHECK(u.qualname() == "K.m#2");
  CHECK(u.name() == "m");
}

TEST_CASE("test paths") {
  CHECK(is_test_path("tests/test_a.py"));
  CHECK(is_test_path("pkg/test_a.py"));
  CHECK(is_test_path("pkg/a_test.py"));
  CHECK(is_test_path("conftest.py"));
  CHECK_FALSE(is_test_path("pkg/testing.py"));
  CHECK(module_name_of("pkg/__init__.py") == "pkg");
  CHECK(module_name_of("pkg/sub/mod.py") == "pkg.sub.mod");
}

TEST_CASE("ingest skips tests unless asked") {
  bptest::TempDir dir;
  write_resolution_repo(dir.path());
  const Repository repo = ingest_repository(dir.path(), "pytest");
  CHECK(repo.find("tests/test_core.py::test_x") == nullptr);
  CHECK(repo.find("pkg/core.py::Child.make") != nullptr);
  CHECK(repo.at("pkg/core.py::Base").kind == UnitKind::Class);
  CHECK_THROWS_AS(repo.at("pkg/core.py::nope"), Error);
  IngestOptions opts;
  opts.include_tests = true;
  CHECK(ingest_repository(dir.path(), "pytest", opts).find("tests/test_core.py::test_x") != nullptr);
}

TEST_CASE("missing root and empty repositories") {
  bptest::TempDir dir;
  try {
    ingest_repository(dir.path() / "absent", "pytest");
    FAIL("expected PathNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PathNotFound);
  }
  try {
    ingest_repository(dir.path(), "pytest");
    FAIL("expected NoUnitsFound");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoUnitsFound);
  }
}

TEST_CASE("resolution table") {
  bptest::TempDir dir;
  write_resolution_repo(dir.path());
  const Repository repo = ingest_repository(dir.path(), "pytest");
  const CallGraph g = build_call_graph(repo);
  struct Row {
    const char* from;
    const char* to;
    bool edge;
  };
  const Row rows[] = {
      {"pkg/core.py::caller", "pkg/core.py::helper", true},
      {"pkg/core.py::shadowed", "pkg/core.py::helper", false},
      {"pkg/core.py::Base.ping", "pkg/core.py::Base.pong", true},
      {"pkg/core.py::Child.pong", "pkg/core.py::Base.pong", true},
      {"pkg/core.py::Child.make", "pkg/core.py::Child", true},
      {"pkg/use.py::via_module", "pkg/core.py::caller", true},
      {"pkg/use.py::via_alias", "pkg/core.py::Base", true},
      {"pkg/use.py::via_alias", "pkg/core.py::Base.ping", true},
      {"pkg/use.py::via_reexport", "pkg/core.py::helper", true},
      {"pkg/use.py::via_class_attr", "pkg/core.py::Child.make", true},
      {"pkg/use.py::unknown_receiver", "pkg/core.py::Child.unique_name", true},
  };
  for (const auto& r : rows) {
    CAPTURE(r.from);
    CAPTURE(r.to);
    CHECK(has(g, r.from, r.to) == r.edge);
  }
  const auto& un = g.unresolved();
  const auto missing = std::find(un.begin(), un.end(),
                                 std::pair<std::string, std::string>{"pkg/use.py::external", "missing"});
  CHECK(missing != un.end());
  // Calls into the standard library are never edges.
  CHECK(g.successors(g.index_of("pkg/use.py::external")).empty());
  CHECK(g.successors(g.index_of("pkg/core.py::helper")).empty());
}

TEST_CASE("snapshot round trip") {
  bptest::TempDir dir;
  write_resolution_repo(dir.path());
  const Repository repo = ingest_repository(dir.path(), "pytest");
  const CallGraph g = build_call_graph(repo);
  const auto snap = snapshot_json(repo, g);
  CHECK(snap.at("schema_version") == 1);
  const CallGraph back = call_graph_from_snapshot(snap);
  auto named = [](const CallGraph& graph) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [a, b] : graph.edges()) out.emplace(graph.nodes()[a], graph.nodes()[b]);
    return out;
  };
  std::set<std::string> nodes(g.nodes().begin(), g.nodes().end());
  CHECK(std::set<std::string>(back.nodes().begin(), back.nodes().end()) == nodes);
  CHECK(named(back) == named(g));
  CHECK(back.unresolved() == g.unresolved());
}

TEST_CASE("chain distance is undirected") {
  const CallGraph g = CallGraph::from_edges(5, {{0, 1}, {2, 1}, {2, 3}});
  CHECK(chain_distance(g, 0, 3) == std::optional<std::size_t>(3));
  CHECK(chain_distance(g, 3, 0) == std::optional<std::size_t>(3));
  CHECK(chain_distance(g, 1, 1) == std::optional<std::size_t>(0));
  CHECK_FALSE(chain_distance(g, 0, 4).has_value());
  CHECK(chain_distance(g, "n0", "n2") == std::optional<std::size_t>(2));
}

TEST_CASE("from_edges dedupes and validates") {
  const CallGraph g = CallGraph::from_edges(3, {{1, 2}, {0, 1}, {1, 2}});
  CHECK(g.edges().size() == 2);
  CHECK(g.predecessors(2) == std::vector<std::size_t>{1});
  CHECK_THROWS(CallGraph::from_edges(2, {{0, 5}}));
  CHECK_THROWS_AS(g.index_of("zz"), Error);
}

TEST_CASE("fixture repository graph") {
  const Repository repo = ingest_repository(bptest::fixtures() / "pyrepo", "pytest");
  const CallGraph g = build_call_graph(repo);
  CHECK(g.size() == repo.units.size());
  CHECK(g.edges().size() > 10);
}

TEST_CASE("re-ingesting is deterministic") {
  const Repository a = ingest_repository(bptest::fixtures() / "pyrepo", "pytest");
  const Repository b = ingest_repository(bptest::fixtures() / "pyrepo", "pytest");
  REQUIRE(a.units.size() == b.units.size());
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    CHECK(a.units[i].id == b.units[i].id);
    CHECK(a.units[i].span == b.units[i].span);
    CHECK(a.units[i].text() == b.units[i].text());
  }
  CHECK(build_call_graph(a).edges() == build_call_graph(b).edges());
}

TEST_CASE("every edge names its callee in the caller body") {
  for (const char* root : {"pyrepo", "minirepo", "hackrepo"}) {
    const Repository repo = ingest_repository(bptest::fixtures() / root, "pytest");
    const CallGraph g = build_call_graph(repo);
    for (const auto& [from, to] : g.edges()) {
      const FunctionUnit& caller = repo.at(g.nodes()[from]);
      const std::string callee(repo.at(g.nodes()[to]).name());
      CAPTURE(g.nodes()[from]);
      CAPTURE(g.nodes()[to]);
      CHECK(caller.body.find(callee + "(") != std::string::npos);
    }
  }
}

TEST_CASE("chain distance is a metric") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const CallGraph g = bptest::random_graph(seed, 10, 0.3);
    const std::size_t n = g.size();
    for (std::size_t a = 0; a < n; ++a) {
      CHECK(chain_distance(g, a, a) == std::optional<std::size_t>(0));
      for (std::size_t b = 0; b < n; ++b) {
        const auto ab = chain_distance(g, a, b);
        CHECK(ab == chain_distance(g, b, a));
        if (a != b && ab) CHECK(*ab > 0);
        for (std::size_t c = 0; c < n; ++c) {
          const auto bc = chain_distance(g, b, c);
          const auto ac = chain_distance(g, a, c);
          if (ab && bc) {
            REQUIRE(ac);
            CHECK(*ac <= *ab + *bc);
          }
        }
      }
    }
  }
}
