#include "breakpoint/corruption.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"
#include "breakpoint/prompts.hpp"
#include "breakpoint/python/lexer.hpp"

namespace fs = std::filesystem;

namespace breakpoint {
namespace {

using python::Node;
using python::NodeKind;
using python::Token;
using python::TokenKind;

std::string header_indent(const FunctionUnit& u) { return python::line_indent(u.signature, 0); }

// Indentation of the first statement line of the body, falling back to the
// docstring line or one level below the header.
std::string body_indent(const FunctionUnit& u) {
  std::istringstream in(u.body);
  for (std::string line; std::getline(in, line);) {
    const std::size_t p = line.find_first_not_of(" \t");
    if (p == std::string::npos || line[p] == '#') continue;
    return line.substr(0, p);
  }
  if (!u.docstring.empty()) {
    const std::size_t p = u.docstring.find_first_not_of(" \t");
    if (p != std::string::npos && p > 0) return u.docstring.substr(0, p);
  }
  return header_indent(u) + "    ";
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const SourceFile* source_of(const Repository& repo, std::string_view file) {
  for (const auto& s : repo.sources) {
    if (s.path == file) return &s;
  }
  return nullptr;
}

// Text of `unit_id` as it appears in `source` (after a substitution).
std::string unit_text_in(std::string_view file, const std::string& source, std::string_view unit_id) {
  for (const auto& u : units_of_source(file, source)) {
    if (u.id == unit_id) return u.text();
  }
  throw Error(Errc::UnknownUnit, std::string(unit_id));
}

std::vector<std::pair<TokenKind, std::string>> significant_tokens(const std::string& text) {
  const std::string flat = python::dedent(text);
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const Token& t : python::tokenize(flat)) {
    if (t.kind == TokenKind::Comment || t.kind == TokenKind::Nl) continue;
    out.emplace_back(t.kind, std::string(t.text));
  }
  return out;
}

std::multiset<std::string> comments_of(const std::string& text) {
  const std::string flat = python::dedent(text);
  std::multiset<std::string> out;
  for (const Token& t : python::tokenize(flat)) {
    if (t.kind == TokenKind::Comment) out.emplace(t.text);
  }
  return out;
}

bool is_decimal_int(std::string_view s) {
  if (s.empty() || s.size() > 9) return false;
  if (s.size() > 1 && s[0] == '0') return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Module names imported by a file, with every dotted prefix.
void add_with_prefixes(const std::string& dotted, std::set<std::string>& out) {
  if (dotted.empty()) return;
  out.insert(dotted);
  for (std::size_t p = dotted.find('.'); p != std::string::npos; p = dotted.find('.', p + 1)) {
    out.insert(dotted.substr(0, p));
  }
}

void collect_imports(const Node& n, const std::string& package, std::set<std::string>& out) {
  if (n.kind == NodeKind::Import) {
    for (const Node& a : n.children) add_with_prefixes(a.value, out);
  } else if (n.kind == NodeKind::ImportFrom) {
    std::string base;
    if (n.level > 0) {
      base = package;
      for (int i = 1; i < n.level; ++i) {
        const std::size_t dot = base.rfind('.');
        base = dot == std::string::npos ? std::string() : base.substr(0, dot);
      }
      if (!n.value.empty()) base = base.empty() ? n.value : base + "." + n.value;
    } else {
      base = n.value;
    }
    add_with_prefixes(base, out);
    for (const Node& a : n.children) {
      if (a.value != "*") out.insert(base.empty() ? a.value : base + "." + a.value);
    }
  }
  for (const Node& c : n.children) collect_imports(c, package, out);
}

struct ModuleFile {
  std::string path;
  std::string text;
  std::set<std::string> imports;
};

}  // namespace

void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
  const std::string h = sha256_hex(std::to_string(seed) + ":" + std::string(salt));
  return std::stoull(h.substr(0, 16), nullptr, 16);
}

Corruption delete_function(const Repository& repo, std::string_view target) {
  const FunctionUnit& u = repo.at(target);
  if (u.kind == UnitKind::Class) {
    throw Error(Errc::UnsupportedTarget, "classes are not deletion targets: " + u.id);
  }
  std::string text = u.signature + u.docstring;
  if (!text.empty() && text.back() == '\n') {
    text += body_indent(u);
    text += kDeletionPlaceholder;
  } else {
    // Single-line definition such as `def f(): return 1`.
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
    text += u.docstring.empty() ? " " : "; ";
    text += kDeletionPlaceholder;
  }
  text += '\n';
  const std::string problem = python::validate_unit_source(text, u.name());
  if (!problem.empty()) throw Error(Errc::UnsupportedTarget, u.id + ": " + problem);
  Corruption c;
  c.target = u.id;
  c.method = CorruptionMethod::Deletion;
  c.corrupted_body = std::move(text);
  c.original_digest = content_digest(u.text());
  return c;
}

std::string check_candidate(const FunctionUnit& original, const std::string& candidate) {
  const std::string problem = python::validate_unit_source(candidate, original.name());
  if (!problem.empty()) return problem;
  if (python::normalized_signature(candidate) != python::normalized_signature(original.text())) {
    return "the definition line changed";
  }
  if (significant_tokens(candidate) == significant_tokens(original.text())) {
    return "identical to the original";
  }
  const auto before = comments_of(original.text());
  for (const auto& c : comments_of(candidate)) {
    if (before.count(c) == 0) return "adds comments";
  }
  return {};
}

std::vector<std::string> mutation_candidates(const FunctionUnit& unit) {
  static const std::map<std::string_view, std::string_view> op_swaps = {
      {"+", "-"},   {"-", "+"},  {"<", "<="}, {"<=", "<"}, {">", ">="},  {">=", ">"},
      {"==", "!="}, {"!=", "=="}, {"+=", "-="}, {"-=", "+="}, {"//", "/"}};
  static const std::map<std::string_view, std::string_view> name_swaps = {
      {"True", "False"}, {"False", "True"}, {"and", "or"}, {"or", "and"}, {"min", "max"}, {"max", "min"}};

  const std::string text = unit.text();
  std::vector<Token> tokens;
  try {
    tokens = python::tokenize(text);
  } catch (const SyntaxError&) {
    return {};
  }
  const std::size_t body_begin = unit.signature.size() + unit.docstring.size();
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto emit = [&](std::size_t begin, std::size_t end, std::string_view replacement) {
    std::string m = text.substr(0, begin);
    m += replacement;
    m += text.substr(end);
    if (seen.insert(m).second) out.push_back(std::move(m));
  };
  for (const Token& t : tokens) {
    if (t.begin < body_begin) continue;
    if (t.kind == TokenKind::Op) {
      auto it = op_swaps.find(t.text);
      if (it != op_swaps.end()) emit(t.begin, t.end, it->second);
    } else if (t.kind == TokenKind::Name) {
      auto it = name_swaps.find(t.text);
      if (it != name_swaps.end()) {
        emit(t.begin, t.end, it->second);
      } else if (t.text == "not") {
        std::size_t end = t.end;
        while (end < text.size() && text[end] == ' ') ++end;
        emit(t.begin, end, "");
      }
    } else if (t.kind == TokenKind::Number && is_decimal_int(t.text)) {
      const long v = std::stol(std::string(t.text));
      emit(t.begin, t.end, std::to_string(v + 1));
      if (v > 0) emit(t.begin, t.end, std::to_string(v - 1));
    }
  }
  return out;
}

std::optional<std::string> ScriptedCorruptionClient::propose(const CorruptionContext& ctx,
                                                             const std::vector<CorruptionFeedback>& history) {
  if (history.empty()) {
    FunctionUnit original;
    // Rebuild the unit pieces from its text so the body offset is known.
    const std::string flat = ctx.original_text;
    try {
      const auto units = units_of_source("x.py", python::dedent(flat));
      if (!units.empty()) original = units.front();
    } catch (const SyntaxError&) {
    }
    if (original.id.empty()) return std::nullopt;
    queue_ = mutation_candidates(original);
    seeded_shuffle(queue_, mix_seed(seed_, ctx.target));
    next_ = 0;
    // Candidates are produced on the dedented text; restore the indentation.
    const std::string indent = python::line_indent(flat, 0);
    if (!indent.empty()) {
      for (auto& q : queue_) q = python::reindent(q, indent);
    }
  } else if (static_cast<int>(history.back().failing.size()) >= floor_ && history.back().rejection.empty()) {
    return std::nullopt;
  }
  if (next_ >= queue_.size()) return std::nullopt;
  return queue_[next_++];
}

std::optional<std::string> FixedCorruptionClient::propose(const CorruptionContext&,
                                                          const std::vector<CorruptionFeedback>&) {
  if (next_ >= candidates_.size()) return std::nullopt;
  return candidates_[next_++];
}

std::vector<std::string> relevant_test_excerpts(const Repository& repo, std::string_view target,
                                                std::size_t limit) {
  const FunctionUnit& unit = repo.at(target);
  const std::string target_module = module_name_of(unit.file());

  std::map<std::string, ModuleFile> modules;  // by dotted name
  for (const std::string& rel : list_python_files(repo.root)) {
    ModuleFile m;
    m.path = rel;
    m.text = read_text(repo.root / rel);
    std::string name = module_name_of(rel);
    const bool is_package = fs::path(rel).filename() == "__init__.py";
    const std::size_t dot = name.rfind('.');
    const std::string package = is_package ? name : (dot == std::string::npos ? "" : name.substr(0, dot));
    try {
      python::ParsedModule parsed(m.text);
      collect_imports(parsed.module(), package, m.imports);
    } catch (const SyntaxError&) {
      continue;
    }
    modules.emplace(std::move(name), std::move(m));
  }

  auto reaches_target = [&](const std::string& start) {
    std::set<std::string> seen{start};
    std::deque<std::string> queue{start};
    while (!queue.empty()) {
      const std::string cur = queue.front();
      queue.pop_front();
      if (cur == target_module) return true;
      auto it = modules.find(cur);
      if (it == modules.end()) continue;
      for (const auto& imp : it->second.imports) {
        if (modules.count(imp) != 0 && seen.insert(imp).second) queue.push_back(imp);
      }
    }
    return false;
  };

  struct Excerpt {
    bool mentions;
    std::string file;
    int line;
    std::string text;
  };
  std::vector<Excerpt> found;
  const std::string name(unit.name());
  for (const auto& [mod, m] : modules) {
    if (!is_test_path(m.path) || !reaches_target(mod)) continue;
    std::vector<FunctionUnit> units;
    try {
      units = units_of_source(m.path, m.text);
    } catch (const SyntaxError&) {
      continue;
    }
    for (const auto& u : units) {
      if (u.kind == UnitKind::Class || u.name().rfind("test", 0) != 0) continue;
      found.push_back({u.body.find(name) != std::string::npos, m.path, u.span.start, u.text()});
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Excerpt& a, const Excerpt& b) {
    if (a.mentions != b.mentions) return a.mentions;
    if (a.file != b.file) return a.file < b.file;
    return a.line < b.line;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < found.size() && i < limit; ++i) {
    out.push_back("# " + found[i].file + "\n" + python::dedent(found[i].text));
  }
  return out;
}

std::string render_corruption_prompt(const Repository& repo, std::string_view target, int test_budget,
                                     int max_tool_calls) {
  const FunctionUnit& u = repo.at(target);
  std::string examples;
  for (const auto& e : relevant_test_excerpts(repo, target)) {
    if (!examples.empty()) examples += "\n";
    examples += e;
  }
  return render_template(corruption_prompt_template(),
                         {{"function_path", std::string(u.file())},
                          {"func_code", python::dedent(u.text())},
                          {"test_examples", examples},
                          {"test_budget", std::to_string(test_budget)},
                          {"max_iterations", std::to_string(max_tool_calls)}});
}

AdversarialResult adversarial_corrupt(const Repository& repo, std::string_view target,
                                      const SuiteReport& baseline, CorruptionClient& client,
                                      const AdversarialOptions& options) {
  const FunctionUnit& u = repo.at(target);
  const std::string file(u.file());
  const SourceFile* src = source_of(repo, file);
  if (src == nullptr) throw Error(Errc::UnknownUnit, u.id);

  CorruptionContext ctx;
  ctx.target = u.id;
  ctx.prompt = render_corruption_prompt(repo, target, options.test_budget, options.max_tool_calls);
  ctx.original_text = u.text();
  ctx.test_budget = options.test_budget;
  ctx.max_tool_calls = options.max_tool_calls;

  Sandbox sandbox(repo.root);
  std::vector<CorruptionFeedback> history;
  std::optional<AdversarialResult> best;
  AdversarialResult tally;
  while (tally.proposals < options.max_tool_calls && tally.suite_runs < options.test_budget) {
    std::optional<std::string> candidate;
    try {
      candidate = client.propose(ctx, history);
    } catch (const Error& e) {
      if (e.code() == Errc::ClientFailure) throw;
      throw Error(Errc::ClientFailure, e.what());
    } catch (const std::exception& e) {
      throw Error(Errc::ClientFailure, e.what());
    }
    if (!candidate) break;
    ++tally.proposals;
    CorruptionFeedback fb;
    fb.candidate = *candidate;
    fb.rejection = check_candidate(u, *candidate);
    if (fb.rejection.empty()) {
      sandbox.write(file, src->text);
      const std::string updated = sandbox.replace_unit(u.id, *candidate);
      const SuiteReport after = run_suite(sandbox.root(), repo.test_command, options.harness);
      ++tally.suite_runs;
      fb.failing = failing_diff(baseline, after);
      if (after.exit != SuiteExit::Completed) {
        fb.rejection = "test suite " + std::string(to_string(after.exit));
      } else if (static_cast<int>(fb.failing.size()) >= options.floor) {
        AdversarialResult r;
        r.corruption.target = u.id;
        r.corruption.method = CorruptionMethod::Adversarial;
        r.corruption.corrupted_body = unit_text_in(file, updated, u.id);
        r.corruption.original_digest = content_digest(u.text());
        r.failing = fb.failing;
        best = std::move(r);
      }
    }
    history.push_back(std::move(fb));
  }
  if (!best) {
    throw Error(Errc::NoValidCorruption, "no candidate for " + u.id + " broke " + std::to_string(options.floor) +
                                             " tests in " + std::to_string(tally.proposals) + " proposals");
  }
  best->suite_runs = tally.suite_runs;
  best->proposals = tally.proposals;
  return *best;
}

}  // namespace breakpoint
