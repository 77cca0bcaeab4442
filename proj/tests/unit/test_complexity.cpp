#include <cmath>
#include <map>

#include "breakpoint/complexity.hpp"
#include "breakpoint/csv.hpp"
#include "breakpoint/repo_model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace breakpoint;

namespace {

// Units of every fixture root named in the golden file, keyed the same way.
std::map<std::string, FunctionUnit> golden_units() {
  std::map<std::string, FunctionUnit> out;
  for (const char* root : {"pyrepo", "corpus"}) {
    const Repository repo = ingest_repository(bptest::fixtures() / root, "true");
    for (const auto& u : repo.units) out.emplace(std::string(root) + "/" + u.id, u);
  }
  return out;
}

FunctionUnit unit(const std::string& source, std::string_view qualname = "f") {
  for (auto& u : units_of_source("m.py", source)) {
    if (u.qualname() == qualname) return u;
  }
  FAIL("unit not found");
  return {};
}

}  // namespace

TEST_CASE("golden table") {
  const CsvTable table = read_csv(bptest::golden() / "complexity.csv");
  const auto units = golden_units();
  REQUIRE(table.rows.size() == 64);
  CHECK(units.size() == table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& id = table.get(r, "unit");
    CAPTURE(id);
    const auto it = units.find(id);
    REQUIRE(it != units.end());
    const Complexity c = measure_complexity(it->second);
    const HalsteadCounts h = halstead_counts(it->second);
    CHECK(c.loc == std::stoi(table.get(r, "loc")));
    CHECK(c.cyclomatic == std::stoi(table.get(r, "cyclomatic")));
    CHECK(c.nesting_depth == std::stoi(table.get(r, "nesting_depth")));
    CHECK(h.distinct_operators() == std::stoi(table.get(r, "eta1")));
    CHECK(h.distinct_operands() == std::stoi(table.get(r, "eta2")));
    CHECK(h.total_operators() == std::stoi(table.get(r, "n1")));
    CHECK(h.total_operands() == std::stoi(table.get(r, "n2")));
    CHECK(std::abs(c.halstead.difficulty - std::stod(table.get(r, "difficulty"))) <= 1e-9);
    CHECK(std::abs(c.halstead.volume - std::stod(table.get(r, "volume"))) <= 1e-9);
  }
}

TEST_CASE("single measures agree with the combined pass") {
  for (const auto& [id, u] : golden_units()) {
    CAPTURE(id);
    const Complexity c = measure_complexity(u);
    CHECK(c.loc == count_code_lines(u));
    CHECK(c.cyclomatic == cyclomatic_complexity(u));
    CHECK(c.nesting_depth == nesting_depth(u));
    CHECK(c.halstead.volume == halstead(u).volume);
  }
}

TEST_CASE("empty body") {
  const FunctionUnit u = unit("def f():\n    \"\"\"doc\"\"\"\n");
  const Complexity c = measure_complexity(u);
  CHECK(c.loc == 0);
  CHECK(c.cyclomatic == 1);
  CHECK(c.nesting_depth == 0);
  CHECK(c.halstead.volume == 0.0);
  CHECK(c.halstead.difficulty == 0.0);
}

TEST_CASE("boolean chains count each operator") {
  const FunctionUnit u = unit("def f(a, b, c):\n    return a and b and c or a\n");
  CHECK(cyclomatic_complexity(u) == 4);
  const auto h = halstead_counts(u);
  CHECK(h.operators.at("and") == 2);
  CHECK(h.operators.at("or") == 1);
}

TEST_CASE("elif stays on its if level") {
  const FunctionUnit u = unit(
      "def f(x):\n"
      "    if x:\n"
      "        pass\n"
      "    elif x > 1:\n"
      "        if x > 2:\n"
      "            pass\n");
  CHECK(nesting_depth(u) == 2);
  CHECK(cyclomatic_complexity(u) == 4);
}

TEST_CASE("wildcard case is not a decision") {
  const FunctionUnit u = unit(
      "def f(x):\n"
      "    match x:\n"
      "        case 1:\n"
      "            return 1\n"
      "        case _:\n"
      "            return 0\n");
  CHECK(cyclomatic_complexity(u) == 2);
  CHECK(nesting_depth(u) == 1);
}

TEST_CASE("comments and blank lines are not code") {
  const FunctionUnit u = unit("def f():\n    # note\n\n    x = 1  # trailing\n    return x\n");
  CHECK(count_code_lines(u) == 2);
}

TEST_CASE("halstead formulas") {
  HalsteadCounts h;
  h.operators = {{"=", 2}, {"+", 1}};
  h.operands = {{"x", 2}, {"1", 1}, {"y", 1}};
  const Halstead v = halstead_from_counts(h);
  CHECK(v.difficulty == doctest::Approx(2.0 / 2.0 * 4.0 / 3.0));
  CHECK(v.volume == doctest::Approx(7.0 * std::log2(5.0)));
}

TEST_CASE("halstead zero rules") {
  auto units = golden_units();
  units.emplace("empty", unit("def f():\n    \"\"\"doc\"\"\"\n"));
  units.emplace("pass", unit("def f():\n    pass\n"));
  units.emplace("bare return", unit("def f():\n    return\n"));
  for (const auto& [id, u] : units) {
    CAPTURE(id);
    const HalsteadCounts h = halstead_counts(u);
    const Halstead m = halstead(u);
    CHECK(m.volume >= 0.0);
    // N log2(eta) also vanishes for a one-symbol vocabulary such as a bare return.
    CHECK((m.volume == 0.0) == (h.distinct_operators() + h.distinct_operands() <= 1));
    if (h.total_operators() + h.total_operands() == 0) CHECK(m.volume == 0.0);
    CHECK((m.difficulty == 0.0) == (h.total_operands() == 0));
  }
  CHECK(halstead(units.at("bare return")).volume == 0.0);
  CHECK(halstead_counts(units.at("bare return")).total_operators() == 1);
}
