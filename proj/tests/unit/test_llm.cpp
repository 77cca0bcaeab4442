#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "breakpoint/corruption.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/llm.hpp"
#include "breakpoint/session.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace breakpoint;
using nlohmann::json;

namespace {

json text_reply(const std::string& text) { return {{"choices", {{{"message", {{"content", text}}}}}}}; }

json tool_reply(const std::string& name, const json& args) {
  return {{"choices",
           {{{"message",
              {{"content", nullptr},
               {"tool_calls",
                {{{"id", "call_7"}, {"type", "function"}, {"function", {{"name", name}, {"arguments", args.dump()}}}}}}}}}}}};
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

struct EnvVar {
  EnvVar(const char* name, const char* value) : name_(name) {
    if (value != nullptr) {
      ::setenv(name, value, 1);
    } else {
      ::unsetenv(name);
    }
  }
  ~EnvVar() { ::unsetenv(name_); }
  const char* name_;
};

}  // namespace

TEST_CASE("request body") {
  LlmConfig cfg;
  cfg.model = "m1";
  cfg.temperature = 0.5;
  ToolCall call{"c1", "read_file", {{"path", "a.py"}}};
  const std::vector<ChatMessage> msgs = {{"system", "sys", std::nullopt, {}},
                                         {"assistant", "", call, {}},
                                         {"tool", "{\"ok\":1}", std::nullopt, "c1"}};
  const json body = chat_request_body(cfg, msgs, tool_specs(TaskMode::Remove));
  CHECK(body.at("model") == "m1");
  CHECK(body.at("temperature") == 0.5);
  CHECK(body.at("messages").size() == 3);
  const json& tc = body["messages"][1]["tool_calls"][0];
  CHECK(tc.at("function").at("name") == "read_file");
  CHECK(json::parse(tc["function"]["arguments"].get<std::string>()) == json{{"path", "a.py"}});
  CHECK(body["messages"][2].at("tool_call_id") == "c1");
  CHECK(body.at("tools").size() == tool_specs(TaskMode::Remove).size());
  CHECK(body.at("tools")[0].at("type") == "function");
  CHECK_FALSE(chat_request_body(cfg, msgs, {}).contains("tools"));
}

TEST_CASE("response parsing") {
  const AgentResponse call = parse_chat_response(tool_reply("read_file", {{"path", "x.py"}}));
  REQUIRE(call.tool_call);
  CHECK(call.tool_call->id == "call_7");
  CHECK(call.tool_call->arguments.at("path") == "x.py");

  json broken = tool_reply("read_file", json::object());
  broken["choices"][0]["message"]["tool_calls"][0]["function"]["arguments"] = "{not json";
  const AgentResponse b = parse_chat_response(broken);
  REQUIRE(b.tool_call);
  CHECK(b.tool_call->arguments == json::object());

  const AgentResponse text = parse_chat_response(text_reply("all done"));
  CHECK_FALSE(text.tool_call);
  CHECK(text.final_text == "all done");
  CHECK(code_of([] { parse_chat_response({{"error", "overloaded"}}); }) == Errc::ClientFailure);
  CHECK(code_of([] { parse_chat_response({{"choices", json::array()}}); }) == Errc::ClientFailure);
}

TEST_CASE("last code block") {
  CHECK(last_code_block("x\n```python\na = 1\n```\ny") == "a = 1\n");
  CHECK(last_code_block("```\nfirst\n```\n```py\nsecond\n```") == "second\n");
  CHECK_FALSE(last_code_block("no fences"));
  CHECK_FALSE(last_code_block("```only one"));
}

TEST_CASE("model agent solves through the session") {
  const Repository repo = ingest_repository(bptest::fixtures() / "minirepo", std::string(kDefaultTestCommand));
  const SuiteReport base = baseline(repo);
  const TaskInstance task = bptest::make_task(repo, base, TaskMode::Remove, {delete_function(repo, "arith.py::gcd")});
  const auto env = make_environment(repo, base);
  std::vector<json> seen;
  ChatTransport transport = [&](const json& body) {
    seen.push_back(body);
    if (seen.size() == 1) return tool_reply("read_file", {{"path", "arith.py"}});
    return tool_reply("submit_attempt", {{"code", original_text(repo, "arith.py::gcd")}});
  };
  LlmConfig cfg;
  cfg.model = "mock";
  LlmAgent agent(cfg, transport);
  Session s("s", task, env, {16, 4});
  const Trajectory& t = run_agent(s, agent);
  CHECK(t.score == 1);
  CHECK(t.used_tools == 1);
  CHECK(t.used_attempts == 1);
  REQUIRE(seen.size() == 2);
  const json& last = seen[1]["messages"].back();
  CHECK(last.at("role") == "tool");
  CHECK(last.at("tool_call_id") == "call_7");

  Session failing("f", task, env, {16, 4});
  LlmAgent down(cfg, [](const json&) -> json { throw Error(Errc::ClientFailure, "offline"); });
  const Trajectory& f = run_agent(failing, down);
  CHECK(f.state == SessionState::Failed);
  CHECK(f.score == 0);
}

TEST_CASE("model corruption client feeds back test results") {
  const Repository repo = ingest_repository(bptest::fixtures() / "minirepo", std::string(kDefaultTestCommand));
  const SuiteReport base = baseline(repo);
  std::vector<json> seen;
  const std::vector<std::string> replies = {"```python\ndef add(a, b):\n    return a + b\n```",
                                            "Try this.\n```python\ndef add(a, b):\n    return a - b\n```"};
  LlmCorruptionClient client({}, [&](const json& body) {
    seen.push_back(body);
    return text_reply(replies.at(std::min(seen.size() - 1, replies.size() - 1)));
  });
  const AdversarialResult r = adversarial_corrupt(repo, "arith.py::add", base, client);
  CHECK(r.corruption.corrupted_body == "def add(a, b):\n    return a - b\n");
  REQUIRE(seen.size() >= 2);
  const json& msgs = seen[1]["messages"];
  CHECK(msgs.size() == 3);
  CHECK(msgs[2]["content"].get<std::string>().find("Rejected without running tests") != std::string::npos);

  LlmCorruptionClient quits({}, [](const json&) { return text_reply("DONE"); });
  CorruptionContext ctx;
  ctx.prompt = "p";
  CHECK_FALSE(quits.propose(ctx, {}));
}

TEST_CASE("http transport") {
  httplib::Server server;
  std::string auth;
  int calls = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    const json body = json::parse(req.body);
    if (++calls == 1) {
      res.status = 503;
      return;
    }
    if (body.at("model") == "bad") {
      res.status = 400;
      res.set_content("nope", "text/plain");
      return;
    }
    res.set_content(text_reply("hi").dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.model = "good";
  {
    EnvVar unset(kApiKeyVariable, nullptr);
    CHECK(code_of([&] { http_transport(cfg); }) == Errc::ClientFailure);
  }
  EnvVar key(kApiKeyVariable, "sk-test");
  const ChatTransport t = http_transport(cfg);
  CHECK(parse_chat_response(t(chat_request_body(cfg, {{"user", "x", std::nullopt, {}}}, {}))).final_text == "hi");
  CHECK(calls == 2);
  CHECK(auth == "Bearer sk-test");
  cfg.model = "bad";
  CHECK(code_of([&] { t(chat_request_body(cfg, {}, {})); }) == Errc::ClientFailure);
  server.stop();
  th.join();

  {
    EnvVar url(kBaseUrlVariable, "http://localhost:9/v1");
    CHECK(LlmConfig::from_env("m").base_url == "http://localhost:9/v1");
  }
  CHECK(LlmConfig::from_env("m").base_url == LlmConfig{}.base_url);
}
