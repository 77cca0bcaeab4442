#include "breakpoint/llm.hpp"

#include <cstdlib>

#include <httplib.h>

#include "breakpoint/error.hpp"

using nlohmann::json;

namespace breakpoint {

LlmConfig LlmConfig::from_env(std::string model) {
  LlmConfig c;
  c.model = std::move(model);
  if (const char* url = std::getenv(kBaseUrlVariable); url != nullptr && *url != '\0') c.base_url = url;
  return c;
}

ChatTransport http_transport(const LlmConfig& config) {
  const char* key = std::getenv(kApiKeyVariable);
  if (key == nullptr || *key == '\0') {
    throw Error(Errc::ClientFailure, std::string(kApiKeyVariable) + " is not set");
  }
  // Split "scheme://host[:port]/prefix" into the client address and path prefix.
  const std::string& url = config.base_url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  const std::string auth = std::string("Bearer ") + key;
  return [host, prefix, auth, config](const json& body) {
    httplib::Client client(host);
    const auto secs = static_cast<time_t>(config.timeout_seconds);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    client.set_connection_timeout(30, 0);
    const httplib::Headers headers = {{"Authorization", auth}};
    std::string last_error;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
      auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw Error(Errc::ClientFailure, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw Error(Errc::ClientFailure, std::string("malformed response: ") + e.what());
      }
    }
    throw Error(Errc::ClientFailure, last_error);
  };
}

json chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                       const std::vector<ToolSpec>& tools) {
  json msgs = json::array();
  for (const auto& m : messages) {
    json j = {{"role", m.role}, {"content", m.content}};
    if (m.tool_call) {
      j["tool_calls"] = json::array({{{"id", m.tool_call->id},
                                      {"type", "function"},
                                      {"function", {{"name", m.tool_call->name},
                                                    {"arguments", m.tool_call->arguments.dump()}}}}});
    }
    if (!m.tool_call_id.empty()) j["tool_call_id"] = m.tool_call_id;
    msgs.push_back(std::move(j));
  }
  json body = {{"model", config.model},
               {"messages", msgs},
               {"temperature", config.temperature},
               {"max_tokens", config.max_tokens}};
  if (!tools.empty()) {
    json specs = json::array();
    for (const auto& t : tools) {
      specs.push_back({{"type", "function"},
                       {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
    }
    body["tools"] = specs;
  }
  return body;
}

AgentResponse parse_chat_response(const json& body) {
  try {
    const json& msg = body.at("choices").at(0).at("message");
    AgentResponse out;
    if (msg.contains("content") && msg["content"].is_string()) out.final_text = msg["content"].get<std::string>();
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
      const json& tc = msg["tool_calls"][0];
      ToolCall call;
      call.id = tc.value("id", "call_0");
      call.name = tc.at("function").at("name").get<std::string>();
      const json& args = tc.at("function").at("arguments");
      try {
        call.arguments = args.is_string() ? json::parse(args.get<std::string>()) : args;
      } catch (const json::exception&) {
        // Malformed arguments reach the session, which rejects them for free.
        call.arguments = json::object();
      }
      out.tool_call = std::move(call);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::ClientFailure, std::string("unexpected response shape: ") + e.what());
  }
}

LlmAgent::LlmAgent(LlmConfig config, ChatTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

AgentResponse LlmAgent::respond(const AgentRequest& request) {
  return parse_chat_response(transport_(chat_request_body(config_, request.messages, request.tools)));
}

std::optional<std::string> last_code_block(const std::string& text) {
  const auto close = text.rfind("```");
  if (close == std::string::npos || close == 0) return std::nullopt;
  const auto open = text.rfind("```", close - 1);
  if (open == std::string::npos) return std::nullopt;
  const auto body_start = text.find('\n', open);
  if (body_start == std::string::npos || body_start >= close) return std::nullopt;
  return text.substr(body_start + 1, close - body_start - 1);
}

LlmCorruptionClient::LlmCorruptionClient(LlmConfig config, ChatTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

std::optional<std::string> LlmCorruptionClient::propose(const CorruptionContext& ctx,
                                                        const std::vector<CorruptionFeedback>& history) {
  std::vector<ChatMessage> messages = {{"user", ctx.prompt, std::nullopt, {}}};
  for (const auto& h : history) {
    messages.push_back({"assistant", "```python\n" + h.candidate + "```", std::nullopt, {}});
    std::string feedback;
    if (!h.rejection.empty()) {
      feedback = "Rejected without running tests: " + h.rejection;
    } else {
      feedback = std::to_string(h.failing.size()) + " previously passing tests now fail:";
      for (const auto& t : h.failing) feedback += "\n- " + t;
    }
    messages.push_back({"user", feedback + "\nReply with a revised function in one code block, or DONE.",
                        std::nullopt, {}});
  }
  const AgentResponse r = parse_chat_response(transport_(chat_request_body(config_, messages, {})));
  if (r.final_text.find("DONE") != std::string::npos && !last_code_block(r.final_text)) return std::nullopt;
  auto code = last_code_block(r.final_text);
  if (!code) return std::nullopt;
  return code;
}

}  // namespace breakpoint
