#include "breakpoint/agents.hpp"

#include <exception>

namespace breakpoint {

const Trajectory& run_agent(Session& session, AgentClient& agent, const RunOptions& options) {
  const BudgetConfig& b = session.budget();
  const int max_turns = options.max_turns > 0 ? options.max_turns : 2 * (b.max_tool_uses + b.max_attempts) + 10;
  AgentRequest request;
  request.tools = tool_specs(session.mode());
  request.messages.push_back({"system", session.system_prompt(), std::nullopt, {}});
  request.messages.push_back({"user", session.description().dump(2), std::nullopt, {}});

  std::string reason = "turn limit";
  for (int turn = 0; turn < max_turns; ++turn) {
    AgentResponse response;
    try {
      response = agent.respond(request);
    } catch (const std::exception& e) {
      session.fail(std::string("client failure: ") + e.what());
      return session.trajectory();
    }
    if (!response.tool_call) {
      reason = "agent stopped";
      break;
    }
    const ToolCall& tc = *response.tool_call;
    request.messages.push_back({"assistant", response.final_text, tc, {}});
    const InvokeResult r = session.invoke(tc.name, tc.arguments);
    request.messages.push_back({"tool", r.result.dump(), std::nullopt, tc.id});
    if (session.state() == SessionState::Solved) {
      reason = "solved";
      break;
    }
    if (session.state() == SessionState::Exhausted) {
      reason = "attempts exhausted";
      break;
    }
  }
  return session.close(reason);
}

}  // namespace breakpoint
