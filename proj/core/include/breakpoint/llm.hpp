#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/agents.hpp"
#include "breakpoint/corruption.hpp"

namespace breakpoint {

/// Settings for an OpenAI-compatible chat completions endpoint. The key is
/// read from the environment and never serialized.
struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model;
  double temperature = 0.0;
  int max_tokens = 4096;
  double timeout_seconds = 120.0;
  int retries = 2;

  /// base_url from BREAKPOINT_LLM_BASE_URL when set.
  static LlmConfig from_env(std::string model);
};

inline constexpr const char* kApiKeyVariable = "BREAKPOINT_API_KEY";
inline constexpr const char* kBaseUrlVariable = "BREAKPOINT_LLM_BASE_URL";

/// Posts a request body and returns the parsed response body. Throws on
/// transport errors and non-2xx statuses.
using ChatTransport = std::function<nlohmann::json(const nlohmann::json& body)>;

/// HTTPS (or HTTP) transport over cpp-httplib with bearer authentication.
ChatTransport http_transport(const LlmConfig& config);

/// Request body for a conversation, tools in function-calling format.
nlohmann::json chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                                 const std::vector<ToolSpec>& tools);

/// First tool call of the first choice, or its text when there is none.
AgentResponse parse_chat_response(const nlohmann::json& body);

class LlmAgent : public AgentClient {
 public:
  LlmAgent(LlmConfig config, ChatTransport transport);
  AgentResponse respond(const AgentRequest& request) override;

 private:
  LlmConfig config_;
  ChatTransport transport_;
};

/// Corruption candidates from a model. Each reply's last fenced code block
/// is the candidate; test feedback goes back as the next user turn.
class LlmCorruptionClient : public CorruptionClient {
 public:
  LlmCorruptionClient(LlmConfig config, ChatTransport transport);
  std::optional<std::string> propose(const CorruptionContext& ctx,
                                     const std::vector<CorruptionFeedback>& history) override;

 private:
  LlmConfig config_;
  ChatTransport transport_;
};

/// Last ``` fenced block in `text`, without the fence or language tag.
std::optional<std::string> last_code_block(const std::string& text);

}  // namespace breakpoint
