#include "breakpoint/complexity.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "breakpoint/error.hpp"

namespace breakpoint {
namespace {

using python::Node;
using python::NodeKind;

struct ParsedUnit {
  std::unique_ptr<python::ParsedModule> module;
  python::UnitSlice slice;
};

// Parses the unit on its own. Methods are dedented first; when a string
// literal reaches further left than the header (so dedenting is not possible)
// the unit is parsed as the body of a dummy class instead.
ParsedUnit parse_unit(const FunctionUnit& unit) {
  const std::string text = unit.text();
  ParsedUnit out;
  try {
    out.module = std::make_unique<python::ParsedModule>(python::dedent(text));
    auto slices = python::extract_units(*out.module);
    if (!slices.empty()) {
      out.slice = slices.front();
      return out;
    }
  } catch (const SyntaxError&) {
  }
  out.module = std::make_unique<python::ParsedModule>("class _:\n" + text);
  auto slices = python::extract_units(*out.module);
  if (slices.size() < 2) throw Error(Errc::ParseError, "no definition found in " + unit.id);
  out.slice = slices[1];
  return out;
}

std::vector<const Node*> statements(const ParsedUnit& p) { return python::body_statements(p.slice); }

class HalsteadWalker {
 public:
  HalsteadCounts counts;

  void statement(const Node& n) {
    switch (n.kind) {
      case NodeKind::Block:
      case NodeKind::ElseClause:
      case NodeKind::FinallyClause:
      case NodeKind::Try:
        children(n);
        return;
      case NodeKind::FunctionDef:
        op(n.has(python::kAsync) ? "async def" : "def");
        operand(n.value);
        children(n.children[0]);
        params(n.children[1]);
        statement(n.children.back());
        return;
      case NodeKind::ClassDef:
        op("class");
        operand(n.value);
        children(n.children[0]);
        children(n.children[1]);
        statement(n.children.back());
        return;
      case NodeKind::If:
        op(n.has(python::kElif) ? "elif" : "if");
        children(n);
        return;
      case NodeKind::For:
        op(n.has(python::kAsync) ? "async for" : "for");
        children(n);
        return;
      case NodeKind::While:
        op("while");
        children(n);
        return;
      case NodeKind::ExceptHandler:
        op("except");
        expr(n.children[0]);
        if (!n.value.empty()) operand(n.value);
        statement(n.children[1]);
        return;
      case NodeKind::With:
        op(n.has(python::kAsync) ? "async with" : "with");
        children(n);
        return;
      case NodeKind::WithItem:
        children(n);
        return;
      case NodeKind::Match:
        op("match");
        expr(n.children[0]);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const Node& c = n.children[i];
          op("case");
          expr(c.children[0]);
          if (!c.children[1].empty()) {
            op("if");
            expr(c.children[1]);
          }
          statement(c.children[2]);
        }
        return;
      case NodeKind::Return:
        op("return");
        expr(n.children[0]);
        return;
      case NodeKind::Assign:
        for (std::size_t i = 0; i + 1 < n.children.size(); ++i) {
          op("=");
          expr(n.children[i]);
        }
        expr(n.children.back());
        return;
      case NodeKind::AugAssign:
        op(n.value);
        children(n);
        return;
      case NodeKind::AnnAssign:
        expr(n.children[0]);
        expr(n.children[1]);
        if (!n.children[2].empty()) {
          op("=");
          expr(n.children[2]);
        }
        return;
      case NodeKind::ExprStmt:
        children(n);
        return;
      case NodeKind::Raise:
        op("raise");
        expr(n.children[0]);
        if (!n.children[1].empty()) {
          op("from");
          expr(n.children[1]);
        }
        return;
      case NodeKind::Delete:
        op("del");
        children(n);
        return;
      case NodeKind::Assert:
        op("assert");
        children(n);
        return;
      case NodeKind::Import:
      case NodeKind::ImportFrom:
        op(n.kind == NodeKind::Import ? "import" : "from-import");
        for (const Node& alias : n.children) operand(alias.alt.empty() ? alias.value : alias.alt);
        return;
      case NodeKind::Pass:
      case NodeKind::Break:
      case NodeKind::Continue:
      case NodeKind::Global:
      case NodeKind::Nonlocal:
        return;
      default:
        expr(n);
        return;
    }
  }

  void expr(const Node& n) {
    switch (n.kind) {
      case NodeKind::Empty:
        return;
      case NodeKind::Name:
      case NodeKind::Constant:
        operand(n.value);
        return;
      case NodeKind::BinOp:
        op(n.value);
        break;
      case NodeKind::UnaryOp:
        op(n.value == "not" ? std::string("not") : "u" + n.value);
        break;
      case NodeKind::BoolOp:
        for (std::size_t i = 1; i < n.children.size(); ++i) op(n.value);
        break;
      case NodeKind::CmpOp:
        op(n.value);
        return;
      case NodeKind::Call:
        op("()");
        break;
      case NodeKind::Keyword:
        if (!n.value.empty()) operand(n.value);
        break;
      case NodeKind::Starred:
        op("*");
        break;
      case NodeKind::DoubleStarred:
        op("**");
        break;
      case NodeKind::Attribute:
        op(".");
        operand(n.value);
        break;
      case NodeKind::Subscript:
        op("[]");
        break;
      case NodeKind::Slice:
        op(":");
        break;
      case NodeKind::IfExp:
        op("if-else");
        break;
      case NodeKind::Lambda:
        op("lambda");
        params(n.children[0]);
        expr(n.children[1]);
        return;
      case NodeKind::NamedExpr:
        op(":=");
        break;
      case NodeKind::Comprehension:
        op(n.has(python::kAsync) ? "async for" : "for");
        expr(n.children[0]);
        expr(n.children[1]);
        for (std::size_t i = 2; i < n.children.size(); ++i) {
          op("if");
          expr(n.children[i]);
        }
        return;
      case NodeKind::Yield:
        op("yield");
        break;
      case NodeKind::YieldFrom:
        op("yield from");
        break;
      case NodeKind::Await:
        op("await");
        break;
      case NodeKind::MatchAs:
        op("as");
        break;
      default:
        break;
    }
    for (const Node& c : n.children) expr(c);
  }

 private:
  void op(const std::string& label) { ++counts.operators[label]; }
  void operand(const std::string& text) { ++counts.operands[text]; }

  void children(const Node& n) {
    for (const Node& c : n.children) statement(c);
  }

  // Parameter names are not operands; defaults are ordinary expressions.
  void params(const Node& args) {
    for (const Node& p : args.children) {
      if (p.kind == NodeKind::Param && p.children.size() > 1) expr(p.children[1]);
    }
  }
};

bool is_wildcard_case(const Node& c) {
  const Node& pattern = c.children[0];
  return pattern.kind == NodeKind::Name && pattern.value == "_" && c.children[1].empty();
}

int decision_points(const Node& n) {
  int count = 0;
  switch (n.kind) {
    case NodeKind::If:
    case NodeKind::For:
    case NodeKind::While:
    case NodeKind::ExceptHandler:
    case NodeKind::IfExp:
      count = 1;
      break;
    case NodeKind::BoolOp:
      count = static_cast<int>(n.children.size()) - 1;
      break;
    case NodeKind::Comprehension:
      count = static_cast<int>(n.children.size()) - 1;  // the `for` plus each `if`
      break;
    case NodeKind::MatchCase:
      count = is_wildcard_case(n) ? 0 : 1;
      break;
    default:
      break;
  }
  for (const Node& c : n.children) count += decision_points(c);
  return count;
}

bool opens_level(const Node& n) {
  switch (n.kind) {
    case NodeKind::If:
      return !n.has(python::kElif);
    case NodeKind::For:
    case NodeKind::While:
    case NodeKind::Try:
    case NodeKind::With:
    case NodeKind::Match:
    case NodeKind::FunctionDef:
    case NodeKind::ClassDef:
      return true;
    default:
      return false;
  }
}

int max_depth(const Node& n, int level) {
  int best = level;
  for (const Node& c : n.children) {
    best = std::max(best, max_depth(c, opens_level(c) ? level + 1 : level));
  }
  return best;
}

int code_lines(const ParsedUnit& p) {
  std::set<int> lines;
  for (const python::Token& t : p.module->tokens()) {
    if (t.begin < p.slice.docstring_end || t.begin >= p.slice.end) continue;
    switch (t.kind) {
      case python::TokenKind::Name:
      case python::TokenKind::Number:
      case python::TokenKind::String:
      case python::TokenKind::Op:
        for (int l = t.line; l <= t.end_line; ++l) lines.insert(l);
        break;
      default:
        break;
    }
  }
  return static_cast<int>(lines.size());
}

HalsteadCounts counts_of(const ParsedUnit& p) {
  HalsteadWalker w;
  for (const Node* s : statements(p)) w.statement(*s);
  return std::move(w.counts);
}

int cyclomatic_of(const ParsedUnit& p) {
  int m = 1;
  for (const Node* s : statements(p)) m += decision_points(*s);
  return m;
}

int nesting_of(const ParsedUnit& p) {
  int best = 0;
  for (const Node* s : statements(p)) best = std::max(best, max_depth(*s, opens_level(*s) ? 1 : 0));
  return best;
}

}  // namespace

int HalsteadCounts::total_operators() const {
  return std::accumulate(operators.begin(), operators.end(), 0,
                         [](int acc, const auto& kv) { return acc + kv.second; });
}

int HalsteadCounts::total_operands() const {
  return std::accumulate(operands.begin(), operands.end(), 0,
                         [](int acc, const auto& kv) { return acc + kv.second; });
}

Halstead halstead_from_counts(const HalsteadCounts& c) {
  const double eta1 = c.distinct_operators();
  const double eta2 = c.distinct_operands();
  const double n1 = c.total_operators();
  const double n2 = c.total_operands();
  Halstead h;
  const double vocabulary = eta1 + eta2;
  const double length = n1 + n2;
  h.volume = vocabulary > 0 ? length * std::log2(vocabulary) : 0.0;
  h.difficulty = eta2 > 0 ? (eta1 / 2.0) * (n2 / eta2) : 0.0;
  return h;
}

HalsteadCounts halstead_counts(const FunctionUnit& unit) { return counts_of(parse_unit(unit)); }

Halstead halstead(const FunctionUnit& unit) { return halstead_from_counts(halstead_counts(unit)); }

int count_code_lines(const FunctionUnit& unit) { return code_lines(parse_unit(unit)); }

int cyclomatic_complexity(const FunctionUnit& unit) { return cyclomatic_of(parse_unit(unit)); }

int nesting_depth(const FunctionUnit& unit) { return nesting_of(parse_unit(unit)); }

Complexity measure_complexity(const FunctionUnit& unit) {
  const ParsedUnit p = parse_unit(unit);
  Complexity c;
  c.loc = code_lines(p);
  c.cyclomatic = cyclomatic_of(p);
  c.halstead = halstead_from_counts(counts_of(p));
  c.nesting_depth = nesting_of(p);
  return c;
}

}  // namespace breakpoint
