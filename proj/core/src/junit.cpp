#include <algorithm>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "breakpoint/error.hpp"
#include "breakpoint/harness.hpp"

namespace breakpoint {
namespace {

namespace pt = boost::property_tree;

int severity(TestStatus s) {
  switch (s) {
    case TestStatus::Pass:
      return 0;
    case TestStatus::Skipped:
      return 1;
    case TestStatus::Fail:
      return 2;
    case TestStatus::Error:
      return 3;
  }
  return 0;
}

std::string first_line(const std::string& s) {
  constexpr std::size_t kMax = 300;
  std::string line = s.substr(0, s.find('\n'));
  if (line.size() > kMax) line.resize(kMax);
  return line;
}

void collect(const pt::ptree& node, std::map<std::string, TestOutcome>& out) {
  for (const auto& [tag, child] : node) {
    if (tag == "testsuite" || tag == "testsuites") {
      collect(child, out);
      continue;
    }
    if (tag != "testcase") continue;
    const std::string cls = child.get<std::string>("<xmlattr>.classname", "");
    const std::string name = child.get<std::string>("<xmlattr>.name", "");
    TestOutcome t;
    t.test_id = cls.empty() ? name : cls + "::" + name;
    if (t.test_id.empty()) continue;
    t.duration = std::max(0.0, child.get<double>("<xmlattr>.time", 0.0));
    if (child.count("error") != 0) {
      t.status = TestStatus::Error;
      t.message = first_line(child.get<std::string>("error.<xmlattr>.message", ""));
    } else if (child.count("failure") != 0) {
      t.status = TestStatus::Fail;
      t.message = first_line(child.get<std::string>("failure.<xmlattr>.message", ""));
    } else if (child.count("skipped") != 0) {
      t.status = TestStatus::Skipped;
    }
    // A teardown error shows up as a second testcase with the same name.
    auto [it, inserted] = out.emplace(t.test_id, t);
    if (!inserted) {
      if (severity(t.status) > severity(it->second.status)) {
        it->second.status = t.status;
        it->second.message = t.message;
      }
      it->second.duration += t.duration;
    }
  }
}

}  // namespace

std::vector<TestOutcome> parse_junit_xml(const std::string& xml) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(Errc::SchemaError, std::string("junit report: ") + e.what());
  }
  if (tree.count("testsuites") == 0 && tree.count("testsuite") == 0) {
    throw Error(Errc::SchemaError, "junit report: no <testsuite> element");
  }
  std::map<std::string, TestOutcome> by_id;
  collect(tree, by_id);
  std::vector<TestOutcome> out;
  out.reserve(by_id.size());
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

}  // namespace breakpoint
