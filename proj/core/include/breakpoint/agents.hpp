#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/repo_model.hpp"
#include "breakpoint/session.hpp"
#include "breakpoint/task.hpp"
#include "breakpoint/trajectory.hpp"

namespace breakpoint {

struct ToolCall {
  std::string id;
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
};

struct ChatMessage {
  std::string role;  // system, user, assistant, tool
  std::string content;
  std::optional<ToolCall> tool_call;  // assistant turns that call a tool
  std::string tool_call_id;           // tool turns
};

struct ToolSpec {
  std::string name;
  std::string description;
  nlohmann::json parameters;  // JSON schema
};

/// Tools offered in `mode`: the five information tools plus the mode's
/// submission tool.
std::vector<ToolSpec> tool_specs(TaskMode mode);

struct AgentRequest {
  std::vector<ChatMessage> messages;
  std::vector<ToolSpec> tools;
};

/// Either one tool call or a final message that ends the run.
struct AgentResponse {
  std::optional<ToolCall> tool_call;
  std::string final_text;
};

class AgentClient {
 public:
  virtual ~AgentClient() = default;
  virtual AgentResponse respond(const AgentRequest& request) = 0;
};

/// Stops at once.
class NullAgent : public AgentClient {
 public:
  AgentResponse respond(const AgentRequest& request) override;
};

/// Issues the given calls in order, then stops.
class ScriptedAgent : public AgentClient {
 public:
  explicit ScriptedAgent(std::vector<ToolCall> calls) : calls_(std::move(calls)) {}
  AgentResponse respond(const AgentRequest& request) override;

 private:
  std::vector<ToolCall> calls_;
  std::size_t next_ = 0;
};

/// Reissues the calls of a recorded trajectory, rejected ones included.
class ReplayAgent : public ScriptedAgent {
 public:
  explicit ReplayAgent(const Trajectory& trajectory);
};

/// Submits the original text of every target, taken from the pristine
/// repository.
class OracleAgent : public ScriptedAgent {
 public:
  OracleAgent(const TaskInstance& task, const Repository& pristine);
};

/// Reads every target, then submits the originals only if it "knows" all of
/// them. Target t is known when mix_seed(seed, t) / 2^64 < competence, so
/// the chance of solving a k-target task is competence^k.
class CompetenceGradedAgent : public ScriptedAgent {
 public:
  CompetenceGradedAgent(const TaskInstance& task, const Repository& pristine, double competence,
                        std::uint64_t seed);
  bool knows_all() const { return knows_all_; }

 private:
  bool knows_all_ = true;
};

/// Original text of `unit_id` in the pristine tree. Throws Error(UnknownUnit).
std::string original_text(const Repository& pristine, std::string_view unit_id);

struct RunOptions {
  int max_turns = 0;  // 0: 2 * (tool budget + attempt budget) + 10
};

/// Drives `agent` against `session` until it stops, solves, runs out of
/// attempts or hits the turn cap, then closes the session. Agent exceptions
/// end the run with state failed and the message as reason.
const Trajectory& run_agent(Session& session, AgentClient& agent, const RunOptions& options = {});

}  // namespace breakpoint
