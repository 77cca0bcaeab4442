#include "breakpoint/agents.hpp"

#include <limits>

#include "breakpoint/corruption.hpp"
#include "breakpoint/error.hpp"

using nlohmann::json;

namespace breakpoint {
namespace {

json object_schema(json properties, json required) {
  return {{"type", "object"}, {"properties", std::move(properties)}, {"required", std::move(required)}};
}

json str(const char* description) { return {{"type", "string"}, {"description", description}}; }

ToolCall call(std::string name, json args, std::size_t n) {
  return {"call_" + std::to_string(n), std::move(name), std::move(args)};
}

}  // namespace

std::vector<ToolSpec> tool_specs(TaskMode mode) {
  std::vector<ToolSpec> specs = {
      {"list_directory", "List files and directories at a path relative to the repository root.",
       object_schema({{"path", str("directory, \".\" for the root")}}, json::array())},
      {"search_code", "Search for a text or regex pattern across all source files.",
       object_schema({{"pattern", str("text or regular expression")},
                      {"is_regex", {{"type", "boolean"}, {"description", "treat pattern as a regex"}}}},
                     {"pattern"})},
      {"read_file", "Read a file. Files that are too large come back as a list of their functions.",
       object_schema({{"path", str("file path")}}, {"path"})},
      {"list_file_functions", "List the top-level function and class definitions of a file, methods included.",
       object_schema({{"path", str("file path")}}, {"path"})},
      {"read_function", "Read the current text of a function or class.",
       object_schema({{"unit_id", str("<file path>::<qualified name>")}}, {"unit_id"})},
  };
  if (mode == TaskMode::Remove) {
    specs.push_back({"submit_attempt",
                     "Submit a full definition of the target function. Runs the test suite.",
                     object_schema({{"code", str("complete definition, header included")}}, {"code"})});
  } else {
    specs.push_back({"replace_function",
                     "Replace a function or class definition. The change persists. Runs the test suite.",
                     object_schema({{"unit_id", str("<file path>::<qualified name>")},
                                    {"code", str("complete definition, header included")}},
                                   {"unit_id", "code"})});
  }
  return specs;
}

AgentResponse NullAgent::respond(const AgentRequest&) { return {std::nullopt, "no attempt"}; }

AgentResponse ScriptedAgent::respond(const AgentRequest&) {
  if (next_ >= calls_.size()) return {std::nullopt, "done"};
  return {calls_[next_++], {}};
}

namespace {

std::vector<ToolCall> replay_calls(const Trajectory& t) {
  std::vector<ToolCall> calls;
  for (const auto& e : t.events) calls.push_back(call(e.tool, e.args, calls.size()));
  return calls;
}

std::vector<ToolCall> oracle_calls(const TaskInstance& task, const Repository& pristine) {
  std::vector<ToolCall> calls;
  for (const auto& c : task.corruptions) {
    const std::string code = original_text(pristine, c.target);
    if (task.mode == TaskMode::Remove) {
      calls.push_back(call("submit_attempt", {{"code", code}}, calls.size()));
    } else {
      calls.push_back(call("replace_function", {{"unit_id", c.target}, {"code", code}}, calls.size()));
    }
  }
  return calls;
}

bool knows(double competence, std::uint64_t seed, const std::string& target) {
  const double u = static_cast<double>(mix_seed(seed, target) >> 11) * 0x1.0p-53;
  return u < competence;
}

}  // namespace

std::string original_text(const Repository& pristine, std::string_view unit_id) {
  return pristine.at(unit_id).text();
}

ReplayAgent::ReplayAgent(const Trajectory& trajectory) : ScriptedAgent(replay_calls(trajectory)) {}

OracleAgent::OracleAgent(const TaskInstance& task, const Repository& pristine)
    : ScriptedAgent(oracle_calls(task, pristine)) {}

CompetenceGradedAgent::CompetenceGradedAgent(const TaskInstance& task, const Repository& pristine,
                                             double competence, std::uint64_t seed)
    : ScriptedAgent([&] {
        std::vector<ToolCall> calls;
        bool all = true;
        for (const auto& c : task.corruptions) {
          calls.push_back(call("read_function", {{"unit_id", c.target}}, calls.size()));
          all = all && knows(competence, seed, c.target);
        }
        if (all) {
          for (auto& fix : oracle_calls(task, pristine)) {
            fix.id = "call_" + std::to_string(calls.size());
            calls.push_back(std::move(fix));
          }
        }
        return calls;
      }()) {
  for (const auto& c : task.corruptions) knows_all_ = knows_all_ && knows(competence, seed, c.target);
}

}  // namespace breakpoint
