#include "breakpoint/session_service.hpp"

#include <condition_variable>
#include <random>

#include <httplib.h>

#include "breakpoint/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace breakpoint {
namespace {

ServiceResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"code", std::string(code)}, {"message", message}}};
}

ServiceResponse error_response(const Error& e) { return error_response(http_status(e.code()), to_string(e.code()), e.what()); }

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::BudgetExhausted:
    case Errc::AttemptsExhausted:
    case Errc::SessionClosed:
      return 410;
    case Errc::NotFound:
    case Errc::UnknownUnit:
      return 404;
    case Errc::StoreLocked:
      return 409;
    case Errc::SnapshotFailure:
    case Errc::IoError:
      return 500;
    default:
      return 400;
  }
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::random_device device;
  std::lock_guard lock(mutex);
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = device();
    for (int j = 0; j < 8; ++j) {
      id.push_back(hex[word & 0xF]);
      word >>= 4;
    }
  }
  return id;
}

SessionService::SessionService(std::vector<TaskInstance> tasks, std::shared_ptr<const EvalEnvironment> env,
                               ServiceOptions options)
    : env_(std::move(env)), options_(std::move(options)) {
  for (auto& t : tasks) {
    std::string id = t.task_id;
    tasks_.emplace(std::move(id), std::move(t));
  }
}

json SessionService::task_view(const TaskInstance& t) const {
  json v = {{"task_id", t.task_id},
            {"mode", to_string(t.mode)},
            {"repo", env_->repo.root.filename().string()},
            {"failing_count", t.failing_tests.size()},
            {"failing_tests", t.failing_tests}};
  if (t.mode == TaskMode::Remove) v["target"] = t.corruptions.front().target;
  return v;
}

json SessionService::handle_json(const Session& s) const {
  json h = {{"session_id", s.id()},
            {"task_id", s.task().task_id},
            {"mode", to_string(s.mode())},
            {"budget", {{"max_tool_uses", s.budget().max_tool_uses}, {"max_attempts", s.budget().max_attempts}}},
            {"remaining", {{"tools", s.remaining_tools()}, {"attempts", s.remaining_attempts()}}},
            {"state", to_string(s.state())},
            {"closed", s.closed()},
            {"task", s.description()}};
  return h;
}

ServiceResponse SessionService::create_session(const json& body) {
  if (!body.is_object() || !body.contains("task_id") || !body["task_id"].is_string()) {
    return error_response(400, "InvalidArgument", "task_id is required");
  }
  const std::string task_id = body["task_id"].get<std::string>();
  auto task = tasks_.find(task_id);
  if (task == tasks_.end()) return error_response(404, "NotFound", "unknown task " + task_id);
  if (!options_.store_dir.empty() && fs::exists(options_.store_dir / ".lock")) {
    return error_response(409, to_string(Errc::StoreLocked), "task store is being written");
  }
  BudgetConfig budget;
  try {
    if (body.contains("budget")) {
      const json& b = body["budget"];
      budget = {b.at("max_tool_uses").get<int>(), b.at("max_attempts").get<int>()};
    } else {
      budget = budget_preset(body.value("budget_preset", options_.default_preset));
    }
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(400, "InvalidArgument", std::string("bad budget: ") + e.what());
  }
  SessionOptions so;
  so.label = body.value("label", std::string("human"));
  so.logical_clock = options_.logical_clock;
  auto entry = std::make_shared<Entry>();
  try {
    entry->session = std::make_shared<Session>(new_session_id(), task->second, env_, budget, so);
  } catch (const Error& e) {
    return error_response(e);
  }
  json handle = handle_json(*entry->session);
  handle["system_prompt"] = entry->session->system_prompt();
  {
    std::lock_guard lock(registry_mutex_);
    sessions_.emplace(entry->session->id(), entry);
  }
  return {201, handle};
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& session_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<Session> SessionService::session(const std::string& session_id) const {
  auto e = find(session_id);
  return e ? e->session : nullptr;
}

namespace {

// Runs `fn` holding the session's lock, or answers 409 when another request
// holds it and waiting is off.
template <class Fn>
ServiceResponse serialized(std::mutex& m, bool wait, Fn&& fn) {
  std::unique_lock lock(m, std::defer_lock);
  if (wait) {
    lock.lock();
  } else if (!lock.try_lock()) {
    return error_response(409, "Busy", "another request on this session is in progress");
  }
  return fn();
}

}  // namespace

ServiceResponse SessionService::invoke_tool(const std::string& session_id, const std::string& tool,
                                            const json& args) {
  auto entry = find(session_id);
  if (!entry) return error_response(404, "NotFound", "unknown session " + session_id);
  return serialized(entry->mutex, options_.wait_when_busy, [&]() -> ServiceResponse {
    Session& s = *entry->session;
    const InvokeResult r = s.invoke(tool, args);
    json remaining = {{"tools", s.remaining_tools()}, {"attempts", s.remaining_attempts()}};
    if (r.error) {
      ServiceResponse resp;
      resp.status = http_status(*r.error);
      if (r.result.contains("error")) {
        resp.body = r.result["error"];
      } else {
        resp.body = {{"code", to_string(*r.error)}, {"message", r.result.value("diagnostics", "")}};
        resp.body["submission"] = r.result;
      }
      resp.body["remaining"] = remaining;
      resp.body["state"] = to_string(s.state());
      return resp;
    }
    return {200, {{"result", r.result}, {"remaining", remaining}, {"state", to_string(s.state())}}};
  });
}

ServiceResponse SessionService::submit(const std::string& session_id, const json& body) {
  auto entry = find(session_id);
  if (!entry) return error_response(404, "NotFound", "unknown session " + session_id);
  const bool remove = entry->session->mode() == TaskMode::Remove;
  return invoke_tool(session_id, remove ? "submit_attempt" : "replace_function",
                     body.is_object() ? body : json::object());
}

void SessionService::persist(const Session& s) const {
  if (options_.trajectory_dir.empty()) return;
  const std::string label = s.trajectory().label.empty() ? "human" : s.trajectory().label;
  write_trajectory(options_.trajectory_dir / label / (s.task().task_id + "__" + s.id() + ".jsonl"), s.trajectory());
}

ServiceResponse SessionService::close_session(const std::string& session_id) {
  auto entry = find(session_id);
  if (!entry) return error_response(404, "NotFound", "unknown session " + session_id);
  std::lock_guard lock(entry->mutex);
  Session& s = *entry->session;
  if (!s.closed()) {
    s.close("closed by client");
    persist(s);
  }
  return {200, s.trajectory().summary()};
}

ServiceResponse SessionService::get_session(const std::string& session_id) {
  auto entry = find(session_id);
  if (!entry) return error_response(404, "NotFound", "unknown session " + session_id);
  return serialized(entry->mutex, options_.wait_when_busy, [&]() -> ServiceResponse {
    const Session& s = *entry->session;
    json h = handle_json(s);
    json events = json::array();
    for (const auto& e : s.trajectory().events) {
      json ev = {{"seq", e.seq}, {"kind", e.kind}, {"tool", e.tool}, {"t", e.t}};
      if (e.kind == "submission") {
        ev["attempt"] = e.attempt;
        ev["failing_count"] = e.failing_count;
        ev["passed"] = e.passed;
      }
      events.push_back(std::move(ev));
    }
    h["events"] = events;
    if (s.closed()) h["summary"] = s.trajectory().summary();
    return {200, h};
  });
}

ServiceResponse SessionService::list_tasks() const {
  json list = json::array();
  for (const auto& [id, t] : tasks_) {
    json v = task_view(t);
    v.erase("failing_tests");
    list.push_back(std::move(v));
  }
  return {200, {{"tasks", list}}};
}

ServiceResponse SessionService::get_task(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return error_response(404, "NotFound", "unknown task " + task_id);
  return {200, task_view(it->second)};
}

std::size_t SessionService::expire_idle(std::chrono::steady_clock::time_point now) {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(registry_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  std::size_t expired = 0;
  for (const auto& e : entries) {
    std::unique_lock lock(e->mutex, std::try_to_lock);
    if (!lock.owns_lock() || e->session->closed()) continue;
    if (now - e->session->last_activity() < options_.idle_timeout) continue;
    e->session->close("expired");
    persist(*e->session);
    ++expired;
  }
  return expired;
}

struct HttpServer::Impl {
  SessionService& service;
  std::chrono::seconds sweep_interval;
  httplib::Server server;
  std::thread serve_thread;
  std::thread sweep_thread;
  std::mutex sweep_mutex;
  std::condition_variable sweep_cv;
  bool stopping = false;

  Impl(SessionService& s, std::chrono::seconds interval) : service(s), sweep_interval(interval) { routes(); }

  static void reply(httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  static std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      reply(res, error_response(400, "InvalidArgument", std::string("malformed JSON: ") + e.what()));
      return std::nullopt;
    }
  }

  void routes() {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto body = parse_body(req, res)) reply(res, service.create_session(*body));
    });
    server.Post(R"(/sessions/([^/]+)/tools/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto body = parse_body(req, res)) reply(res, service.invoke_tool(req.matches[1], req.matches[2], *body));
    });
    server.Post(R"(/sessions/([^/]+)/submit)", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto body = parse_body(req, res)) reply(res, service.submit(req.matches[1], *body));
    });
    server.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.close_session(req.matches[1]));
    });
    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.get_session(req.matches[1]));
    });
    server.Get("/tasks", [this](const httplib::Request&, httplib::Response& res) { reply(res, service.list_tasks()); });
    server.Get(R"(/tasks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.get_task(req.matches[1]));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      reply(res, error_response(500, "Internal", message));
    });
  }

  void start_sweeper() {
    sweep_thread = std::thread([this] {
      std::unique_lock lock(sweep_mutex);
      while (!stopping) {
        sweep_cv.wait_for(lock, sweep_interval, [this] { return stopping; });
        if (stopping) break;
        lock.unlock();
        service.expire_idle();
        lock.lock();
      }
    });
  }

  void stop() {
    {
      std::lock_guard lock(sweep_mutex);
      stopping = true;
    }
    sweep_cv.notify_all();
    server.stop();
    if (serve_thread.joinable()) serve_thread.join();
    if (sweep_thread.joinable()) sweep_thread.join();
  }
};

HttpServer::HttpServer(SessionService& service, std::chrono::seconds sweep_interval)
    : impl_(std::make_unique<Impl>(service, sweep_interval)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->start_sweeper();
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  impl_->start_sweeper();
  if (!impl_->server.listen(host, port)) throw Error(Errc::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (impl_) impl_->stop();
}

}  // namespace breakpoint
