#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace breakpoint {

struct ProcessOptions {
  std::filesystem::path cwd;
  std::map<std::string, std::string> env;  // added to / overriding the inherited environment
  double timeout_seconds = 60.0;
  std::size_t output_limit = 1 << 20;  // combined stdout+stderr bytes kept (the tail)
};

struct ProcessResult {
  int exit_code = -1;  // valid when exited normally
  int term_signal = 0;
  bool timed_out = false;
  double wall_clock = 0.0;
  std::string output;
};

/// Runs `command` through /bin/sh in a new process group. At the deadline the
/// whole group is killed with SIGKILL; stray children are reaped the same way
/// once the shell exits.
ProcessResult run_shell(const std::string& command, const ProcessOptions& options);

}  // namespace breakpoint
