#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoint/session.hpp"
#include "breakpoint/task.hpp"

namespace breakpoint {

struct ServiceOptions {
  std::chrono::seconds idle_timeout{7200};
  bool wait_when_busy = false;            // otherwise a second concurrent call gets 409
  std::filesystem::path trajectory_dir;   // closed sessions are written here when set
  std::filesystem::path store_dir;        // a ".lock" file here refuses new sessions
  std::string default_preset = "default";
  bool logical_clock = false;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP status for an evaluation error.
int http_status(Errc code);

/// Session registry behind the HTTP API. Every method is safe to call from
/// several threads; calls on one session are serialized.
class SessionService {
 public:
  SessionService(std::vector<TaskInstance> tasks, std::shared_ptr<const EvalEnvironment> env,
                 ServiceOptions options = {});

  /// Body: {task_id, budget_preset? | budget?: {max_tool_uses, max_attempts}, label?}.
  ServiceResponse create_session(const nlohmann::json& body);
  ServiceResponse invoke_tool(const std::string& session_id, const std::string& tool, const nlohmann::json& args);
  /// Body: {code, unit_id?}; dispatched on the session's mode.
  ServiceResponse submit(const std::string& session_id, const nlohmann::json& body);
  ServiceResponse close_session(const std::string& session_id);
  ServiceResponse get_session(const std::string& session_id);
  ServiceResponse list_tasks() const;
  ServiceResponse get_task(const std::string& task_id) const;

  /// Closes, scores and persists sessions idle longer than the timeout.
  std::size_t expire_idle(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());

  /// The session object, for tests comparing against direct use.
  std::shared_ptr<Session> session(const std::string& session_id) const;

 private:
  struct Entry {
    std::shared_ptr<Session> session;
    std::mutex mutex;
  };

  std::shared_ptr<Entry> find(const std::string& session_id) const;
  nlohmann::json handle_json(const Session& s) const;
  nlohmann::json task_view(const TaskInstance& t) const;
  void persist(const Session& s) const;

  std::map<std::string, TaskInstance> tasks_;
  std::shared_ptr<const EvalEnvironment> env_;
  ServiceOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

/// 128 random bits as 32 hex digits.
std::string new_session_id();

/// cpp-httplib server exposing a SessionService, with a background sweeper
/// for idle sessions.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service, std::chrono::seconds sweep_interval = std::chrono::seconds(60));
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace breakpoint
