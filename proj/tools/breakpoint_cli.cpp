// Command-line front end: ingest, generate, validate, evaluate, serve, report.

#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "breakpoint/error.hpp"
#include "breakpoint/pipeline.hpp"
#include "breakpoint/session_service.hpp"

using namespace breakpoint;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kBaseline = 3, kClient = 4 };

int exit_code(Errc code) {
  switch (code) {
    case Errc::BaselineFailed:
      return kBaseline;
    case Errc::ClientFailure:
      return kClient;
    case Errc::InvalidArgument:
    case Errc::UnknownAgent:
    case Errc::SchemaError:
      return kValidation;
    default:
      return kOther;
  }
}

struct Overrides {
  std::string config;
  std::string repo;
  std::string store;
  std::string test_command;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<double> cap;
  std::string preset;
};

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
  if (!o.repo.empty()) c.repo = o.repo;
  if (!o.store.empty()) c.store = o.store;
  if (!o.test_command.empty()) c.test_command = o.test_command;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.cap) c.cap_seconds = *o.cap;
  if (!o.preset.empty()) c.budget_preset = o.preset;
  return c;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Code-repair benchmark generator and evaluator"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--repo", o.repo, "repository root");
  app.add_option("--store", o.store, "task store directory");
  app.add_option("--test-command", o.test_command, "suite command with a {report} slot");
  app.add_option("--seed", o.seed, "seed for all randomness");
  app.add_option("-j,--jobs", o.jobs, "worker threads");
  app.add_option("--cap", o.cap, "suite time cap in seconds");
  app.add_option("--preset", o.preset, "budget preset: small, medium, default, xl");

  auto* ingest = app.add_subcommand("ingest", "parse the repository and write metrics");

  auto* generate = app.add_subcommand("generate", "generate and validate tasks");
  bool adversarial = false;
  bool no_deletion = false;
  std::vector<int> ks;
  std::optional<std::size_t> max_targets;
  generate->add_flag("--adversarial", adversarial, "also generate discovery tasks");
  generate->add_flag("--no-deletion", no_deletion, "skip remove-mode tasks");
  generate->add_option("--multifunction", ks, "corruption counts for multi-target tasks")->delimiter(',');
  generate->add_option("--max-targets", max_targets, "cap on single-target candidates");

  auto* validate = app.add_subcommand("validate", "re-run stored tasks and compare failing sets");

  auto* evaluate = app.add_subcommand("evaluate", "run an agent over the store");
  std::string agent;
  std::string mode;
  std::vector<int> eval_ks;
  std::vector<std::string> task_ids;
  bool eval_hard = false;
  bool logical_clock = false;
  evaluate->add_option("--agent", agent, "oracle, null, competence:<c>[:<seed>], llm:<model>")->required();
  evaluate->add_option("--mode", mode, "remove or discovery")->check(CLI::IsMember({"remove", "discovery"}));
  evaluate->add_option("--k", eval_ks, "corruption counts to include")->delimiter(',');
  evaluate->add_option("--task", task_ids, "task ids to include");
  evaluate->add_flag("--hard-only", eval_hard, "only the hard set");
  evaluate->add_flag("--logical-clock", logical_clock, "record sequence numbers instead of times");

  auto* serve = app.add_subcommand("serve", "serve sessions over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  int idle = 7200;
  bool wait_busy = false;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--idle-timeout", idle, "seconds before an idle session is scored and closed");
  serve->add_flag("--wait-when-busy", wait_busy, "queue concurrent calls on a session instead of answering 409");

  auto* report = app.add_subcommand("report", "write analysis tables");
  bool report_hard = false;
  report->add_flag("--hard-only", report_hard, "restrict the difficulty grid to the hard set");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config = resolve(o);
    if (ingest->parsed()) {
      const IngestSummary s = cmd_ingest(config);
      std::cout << json{{"units", s.units}, {"edges", s.edges}}.dump() << '\n';
    } else if (generate->parsed()) {
      if (adversarial) config.adversarial = true;
      if (no_deletion) config.deletion = false;
      if (!ks.empty()) config.multifunction = ks;
      if (max_targets) config.max_targets = *max_targets;
      const GenerationReport r = cmd_generate(config);
      std::cout << r.to_json().dump() << '\n';
    } else if (validate->parsed()) {
      const ValidationSummary s = cmd_validate(config);
      std::cout << json{{"checked", s.checked}, {"mismatched", s.mismatched}}.dump() << '\n';
      if (!s.mismatched.empty()) return kValidation;
    } else if (evaluate->parsed()) {
      if (logical_clock) config.logical_clock = true;
      TaskFilter f;
      if (!mode.empty()) f.mode = task_mode_from_string(mode);
      f.corruption_counts.insert(eval_ks.begin(), eval_ks.end());
      f.task_ids.insert(task_ids.begin(), task_ids.end());
      f.hard_only = eval_hard;
      const EvaluationSummary s = cmd_evaluate(config, agent, f);
      std::cout << json{{"label", s.label}, {"run", s.run}, {"skipped", s.skipped}, {"solved", s.solved},
                        {"failed", s.failed}}
                       .dump()
                << '\n';
      if (s.failed > 0) return kClient;
    } else if (serve->parsed()) {
      config.validate();
      const StorePaths store{config.store};
      const Repository repo = ingest_repository(store.repo(), config.test_command.empty()
                                                                  ? std::string(kDefaultTestCommand)
                                                                  : config.test_command);
      HarnessOptions h;
      h.cap_seconds = config.cap_seconds;
      ServiceOptions so;
      so.idle_timeout = std::chrono::seconds(idle);
      so.wait_when_busy = wait_busy;
      so.trajectory_dir = store.trajectories();
      so.store_dir = store.root;
      so.default_preset = config.budget_preset;
      so.logical_clock = config.logical_clock;
      SessionService service(load_task_store(store.root), make_environment(repo, baseline(repo, h), h), so);
      HttpServer server(service);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << store.root << " on http://" << host << ':' << port << '\n';
      server.listen(host, port);
    } else if (report->parsed()) {
      ReportOptions ro;
      ro.hard_only = report_hard;
      for (const auto& p : cmd_report(config, ro)) std::cout << p.string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
