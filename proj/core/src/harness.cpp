#include "breakpoint/harness.hpp"

#include <stdlib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/process.hpp"

namespace fs = std::filesystem;

namespace breakpoint {

std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::Pass:
      return "pass";
    case TestStatus::Fail:
      return "fail";
    case TestStatus::Error:
      return "error";
    case TestStatus::Skipped:
      return "skipped";
  }
  return "?";
}

std::string_view to_string(SuiteExit e) {
  switch (e) {
    case SuiteExit::Completed:
      return "completed";
    case SuiteExit::Timeout:
      return "timeout";
    case SuiteExit::Crashed:
      return "crashed";
  }
  return "?";
}

const TestOutcome* SuiteReport::find(std::string_view test_id) const {
  auto it = std::lower_bound(outcomes.begin(), outcomes.end(), test_id,
                             [](const TestOutcome& t, std::string_view id) { return t.test_id < id; });
  if (it == outcomes.end() || it->test_id != test_id) return nullptr;
  return &*it;
}

std::set<std::string> SuiteReport::passing() const {
  std::set<std::string> out;
  for (const auto& t : outcomes) {
    if (t.status == TestStatus::Pass) out.insert(t.test_id);
  }
  return out;
}

std::set<std::string> SuiteReport::failing() const {
  std::set<std::string> out;
  for (const auto& t : outcomes) {
    if (t.status == TestStatus::Fail || t.status == TestStatus::Error) out.insert(t.test_id);
  }
  return out;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path make_temp_dir(const std::string& prefix) {
  std::string templ = (fs::temp_directory_path() / (prefix + "XXXXXX")).string();
  if (mkdtemp(templ.data()) == nullptr) throw Error(Errc::SnapshotFailure, "mkdtemp failed: " + templ);
  return templ;
}

bool skip_entry(const fs::path& name) {
  const std::string n = name.filename().string();
  return n == ".git" || n == "__pycache__" || n == ".pytest_cache" || n == ".hg" ||
         name.extension() == ".pyc";
}

void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from)) {
    if (skip_entry(entry.path())) continue;
    const fs::path dest = to / entry.path().filename();
    if (entry.is_symlink()) {
      fs::copy_symlink(entry.path(), dest);
    } else if (entry.is_directory()) {
      copy_tree(entry.path(), dest);
    } else if (entry.is_regular_file()) {
      fs::copy_file(entry.path(), dest);
    }
  }
}

fs::path checked_path(const fs::path& root, std::string_view relative) {
  const fs::path p = (root / fs::path(relative)).lexically_normal();
  const auto rel = p.lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") {
    throw Error(Errc::PathOutsideSandbox, std::string(relative));
  }
  return p;
}

}  // namespace

std::string render_test_command(const std::string& command, const fs::path& report) {
  std::string out = command;
  const std::string slot = "{report}";
  const std::string quoted = shell_quote(report.string());
  for (std::size_t pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + quoted.size())) {
    out.replace(pos, slot.size(), quoted);
  }
  return out;
}

SuiteReport run_suite(const fs::path& snapshot, const std::string& test_command,
                      const HarnessOptions& options) {
  if (!fs::is_directory(snapshot)) throw Error(Errc::PathNotFound, snapshot.string());
  const fs::path scratch = make_temp_dir("breakpoint-report-");
  const fs::path report_path = scratch / "report.xml";

  ProcessOptions po;
  po.cwd = snapshot;
  po.timeout_seconds = options.cap_seconds;
  po.env = options.env;
  po.env.emplace("PYTHONDONTWRITEBYTECODE", "1");
  const std::string command = test_command.empty() ? std::string(kDefaultTestCommand) : test_command;
  const ProcessResult pr = run_shell(render_test_command(command, report_path), po);

  SuiteReport report;
  report.wall_clock = pr.wall_clock;
  report.exit_code = pr.exit_code;
  constexpr std::size_t kTail = 8192;
  report.output_tail = pr.output.size() > kTail ? pr.output.substr(pr.output.size() - kTail) : pr.output;

  bool parsed = false;
  if (fs::exists(report_path)) {
    try {
      report.outcomes = parse_junit_xml(slurp(report_path));
      parsed = true;
    } catch (const Error&) {
    }
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);

  if (pr.timed_out) {
    report.exit = SuiteExit::Timeout;
  } else if (!parsed) {
    report.exit = SuiteExit::Crashed;
  } else {
    report.exit = SuiteExit::Completed;
  }
  return report;
}

Sandbox::Sandbox(const fs::path& source) {
  if (!fs::is_directory(source)) throw Error(Errc::SnapshotFailure, "not a directory: " + source.string());
  base_ = make_temp_dir("breakpoint-sandbox-");
  root_ = base_ / "repo";
  scratch_ = base_ / "scratch";
  try {
    copy_tree(source, root_);
    fs::create_directories(scratch_);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove_all(base_, ec);
    throw Error(Errc::SnapshotFailure, e.what());
  }
}

Sandbox::~Sandbox() {
  std::error_code ec;
  fs::remove_all(base_, ec);
}

std::string Sandbox::read(std::string_view relative) const {
  const fs::path p = checked_path(root_, relative);
  if (!fs::is_regular_file(p)) throw Error(Errc::NotFound, std::string(relative));
  return slurp(p);
}

void Sandbox::write(std::string_view relative, const std::string& text) const {
  const fs::path p = checked_path(root_, relative);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + p.string());
  out << text;
}

std::string splice_unit(std::string_view path, const std::string& source, std::string_view unit_id,
                        const std::string& text) {
  const auto [file, qualname] = split_unit_id(unit_id);
  if (file != path) throw Error(Errc::UnknownUnit, std::string(unit_id));
  return python::replace_unit(source, qualname, text);
}

std::string Sandbox::replace_unit(std::string_view unit_id, const std::string& text) const {
  const auto [file, qualname] = split_unit_id(unit_id);
  const std::string updated = splice_unit(file, read(file), unit_id, text);
  write(file, updated);
  return updated;
}

SuiteReport baseline(const Repository& repo, const HarnessOptions& options) {
  Sandbox sandbox(repo.root);
  SuiteReport report = run_suite(sandbox.root(), repo.test_command, options);
  if (report.exit != SuiteExit::Completed) {
    throw Error(Errc::BaselineFailed, "baseline " + std::string(to_string(report.exit)));
  }
  if (report.outcomes.empty()) throw Error(Errc::BaselineFailed, "baseline ran no tests");
  const auto failing = report.failing();
  if (!failing.empty()) {
    std::string msg = "baseline has failing tests:";
    for (const auto& id : failing) msg += " " + id;
    throw Error(Errc::BaselineFailed, msg);
  }
  return report;
}

std::set<std::string> failing_diff(const SuiteReport& before, const SuiteReport& after) {
  std::set<std::string> out;
  for (const TestOutcome& t : before.outcomes) {
    if (t.status != TestStatus::Pass) continue;
    const TestOutcome* a = after.find(t.test_id);
    if (a == nullptr || a->status == TestStatus::Fail || a->status == TestStatus::Error) {
      out.insert(t.test_id);
    }
  }
  return out;
}

namespace {

void digest_tree(const fs::path& root, const fs::path& dir, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (skip_entry(entry.path())) continue;
    if (entry.is_directory() && !entry.is_symlink()) {
      digest_tree(root, entry.path(), out);
    } else if (entry.is_regular_file()) {
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      out.emplace_back(entry.path().lexically_relative(root).generic_string(), content_digest(ss.str()));
    }
  }
}

}  // namespace

void copy_source_tree(const fs::path& from, const fs::path& to) { copy_tree(from, to); }

std::string tree_digest(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  digest_tree(root, root, files);
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& [path, digest] : files) joined += path + '\0' + digest + '\n';
  return content_digest(joined);
}

std::optional<SuiteReport> SuiteCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = reports_.find(key);
  if (it == reports_.end()) return std::nullopt;
  ++hits_;
  return it->second;
}

void SuiteCache::store(const std::string& key, const SuiteReport& report) {
  std::lock_guard lock(mutex_);
  reports_.emplace(key, report);
}

std::size_t SuiteCache::size() const {
  std::lock_guard lock(mutex_);
  return reports_.size();
}

std::size_t SuiteCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

SuiteReport run_suite_cached(const fs::path& snapshot, const std::string& test_command,
                             const HarnessOptions& options, SuiteCache* cache) {
  if (cache == nullptr) return run_suite(snapshot, test_command, options);
  const std::string key = content_digest(tree_digest(snapshot) + '\0' + test_command);
  if (auto hit = cache->find(key)) return *hit;
  SuiteReport report = run_suite(snapshot, test_command, options);
  // Timeouts depend on machine load, so only settled runs are kept.
  if (report.exit != SuiteExit::Timeout) cache->store(key, report);
  return report;
}

}  // namespace breakpoint
