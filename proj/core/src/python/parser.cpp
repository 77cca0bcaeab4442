#include "breakpoint/python/parser.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "breakpoint/error.hpp"

namespace breakpoint::python {
namespace {

constexpr std::string_view kAugOps[] = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                        "&=", "|=", "^=", ">>=", "<<=", "**="};

bool is_aug_op(const Token& t) {
  if (t.kind != TokenKind::Op) return false;
  return std::find(std::begin(kAugOps), std::end(kAugOps), t.text) != std::end(kAugOps);
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& all) {
    toks_.reserve(all.size());
    for (const Token& t : all) {
      if (t.kind != TokenKind::Comment && t.kind != TokenKind::Nl) toks_.push_back(t);
    }
  }

  Node parse_module() {
    Node mod;
    mod.kind = NodeKind::Module;
    while (!at(TokenKind::EndMarker)) {
      if (at(TokenKind::Newline)) {
        advance();
        continue;
      }
      parse_statement(mod.children);
    }
    if (!mod.children.empty()) {
      mod.range.begin = mod.children.front().range.begin;
      mod.range.line = mod.children.front().range.line;
      mod.range.end = mod.children.back().range.end;
      mod.range.end_line = mod.children.back().range.end_line;
    }
    return mod;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    const std::size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_op(std::string_view op) const { return peek().is_op(op); }
  bool at_kw(std::string_view kw) const { return peek().is_name(kw); }

  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    if (t.kind == TokenKind::Name || t.kind == TokenKind::Number ||
        t.kind == TokenKind::String || t.kind == TokenKind::Op) {
      last_ = &t;
    }
    return t;
  }

  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(const Token& t, const std::string& message) const {
    throw SyntaxError(t.line, t.column + 1, message);
  }
  [[noreturn]] void fail_here(const std::string& message = "invalid syntax") const {
    fail(peek(), message);
  }

  const Token& expect_op(std::string_view op) {
    if (!at_op(op)) fail_here("expected '" + std::string(op) + "'");
    return advance();
  }
  const Token& expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail_here("expected '" + std::string(kw) + "'");
    return advance();
  }
  const Token& expect_name() {
    if (!at(TokenKind::Name) || is_keyword(peek().text)) fail_here("expected a name");
    return advance();
  }
  void expect_newline() {
    if (!at(TokenKind::Newline)) fail_here();
    advance();
  }

  Node start(NodeKind kind, const Token& first) const {
    Node n;
    n.kind = kind;
    n.range.begin = first.begin;
    n.range.line = first.line;
    return n;
  }
  Node start(NodeKind kind) const { return start(kind, peek()); }

  void finish(Node& n) const {
    if (last_ != nullptr) {
      n.range.end = last_->end;
      n.range.end_line = last_->end_line;
    }
  }

  static Node empty_node() { return Node{}; }

  // Node that starts where `first` starts and spans through the last token.
  Node wrap(NodeKind kind, const Node& first) const {
    Node n;
    n.kind = kind;
    n.range.begin = first.range.begin;
    n.range.line = first.range.line;
    return n;
  }

  bool starts_expression(const Token& t) const {
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
        return true;
      case TokenKind::Name:
        if (!is_keyword(t.text)) return true;
        return t.text == "None" || t.text == "True" || t.text == "False" || t.text == "not" ||
               t.text == "lambda" || t.text == "await" || t.text == "yield";
      case TokenKind::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*" || t.text == "..." ||
               t.text == "**";
      default:
        return false;
    }
  }

  // A logical line whose last token is ':' cannot be a simple statement.
  bool logical_line_ends_with_colon() const {
    int depth = 0;
    const Token* prev = nullptr;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
        if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
      }
      if (t.kind == TokenKind::Newline || t.kind == TokenKind::EndMarker) break;
      if (depth == 0 && t.is_op(";")) return false;
      prev = &t;
    }
    return prev != nullptr && prev->is_op(":");
  }

  bool at_soft_keyword(std::string_view kw) const {
    if (!at_kw(kw)) return false;
    const Token& next = peek(1);
    if (next.kind == TokenKind::Newline || next.kind == TokenKind::EndMarker) return false;
    if (next.kind == TokenKind::Op &&
        (next.text == "=" || next.text == "." || next.text == ":" || next.text == "," ||
         next.text == ")" || next.text == "]" || next.text == "}" || is_aug_op(next))) {
      return false;
    }
    return logical_line_ends_with_colon();
  }

  // ---- statements ----------------------------------------------------------

  void parse_statement(std::vector<Node>& out) {
    const Token& t = peek();
    if (t.kind == TokenKind::Indent) fail(t, "unexpected indent");
    if (t.kind == TokenKind::Dedent) fail(t, "unexpected unindent");
    if (t.kind == TokenKind::Name) {
      if (t.text == "if") return out.push_back(parse_if(false));
      if (t.text == "while") return out.push_back(parse_while());
      if (t.text == "for") return out.push_back(parse_for(peek(), false));
      if (t.text == "try") return out.push_back(parse_try());
      if (t.text == "with") return out.push_back(parse_with(peek(), false));
      if (t.text == "def") return out.push_back(parse_funcdef(peek(), empty_decorators(), false));
      if (t.text == "class") return out.push_back(parse_classdef(peek(), empty_decorators()));
      if (t.text == "async") return out.push_back(parse_async(peek(), empty_decorators()));
      if (t.text == "match" && at_soft_keyword("match")) return out.push_back(parse_match());
    }
    if (t.is_op("@")) return out.push_back(parse_decorated());
    parse_simple_statements(out);
  }

  void parse_simple_statements(std::vector<Node>& out) {
    for (;;) {
      out.push_back(parse_small_statement());
      if (!accept_op(";")) break;
      if (at(TokenKind::Newline)) break;
    }
    expect_newline();
  }

  Node parse_block() {
    Node block = start(NodeKind::Block);
    if (at(TokenKind::Newline)) {
      advance();
      if (!at(TokenKind::Indent)) fail_here("expected an indented block");
      advance();
      block.range.begin = peek().begin;
      block.range.line = peek().line;
      while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) {
        if (at(TokenKind::Newline)) {
          advance();
          continue;
        }
        parse_statement(block.children);
      }
      if (at(TokenKind::Dedent)) advance();
    } else {
      parse_simple_statements(block.children);
    }
    if (block.children.empty()) fail_here("expected an indented block");
    block.range.end = block.children.back().range.end;
    block.range.end_line = block.children.back().range.end_line;
    return block;
  }

  Node parse_else_clause(NodeKind kind, std::string_view kw) {
    Node clause = start(kind);
    expect_kw(kw);
    expect_op(":");
    clause.children.push_back(parse_block());
    finish(clause);
    return clause;
  }

  Node parse_if(bool elif) {
    Node n = start(NodeKind::If);
    if (elif) {
      n.flags |= kElif;
      expect_kw("elif");
    } else {
      expect_kw("if");
    }
    n.children.push_back(parse_namedexpr_test());
    expect_op(":");
    n.children.push_back(parse_block());
    if (at_kw("elif")) {
      n.children.push_back(parse_if(true));
    } else if (at_kw("else")) {
      n.children.push_back(parse_else_clause(NodeKind::ElseClause, "else"));
    } else {
      n.children.push_back(empty_node());
    }
    finish(n);
    return n;
  }

  Node parse_while() {
    Node n = start(NodeKind::While);
    expect_kw("while");
    n.children.push_back(parse_namedexpr_test());
    expect_op(":");
    n.children.push_back(parse_block());
    n.children.push_back(at_kw("else") ? parse_else_clause(NodeKind::ElseClause, "else")
                                       : empty_node());
    finish(n);
    return n;
  }

  Node parse_for(const Token& first, bool is_async) {
    Node n = start(NodeKind::For, first);
    if (is_async) n.flags |= kAsync;
    expect_kw("for");
    Node target = parse_target_list();
    check_target(target, false);
    n.children.push_back(std::move(target));
    expect_kw("in");
    n.children.push_back(parse_star_expressions());
    expect_op(":");
    n.children.push_back(parse_block());
    n.children.push_back(at_kw("else") ? parse_else_clause(NodeKind::ElseClause, "else")
                                       : empty_node());
    finish(n);
    return n;
  }

  Node parse_try() {
    Node n = start(NodeKind::Try);
    expect_kw("try");
    expect_op(":");
    n.children.push_back(parse_block());
    bool handlers = false;
    while (at_kw("except")) {
      handlers = true;
      Node h = start(NodeKind::ExceptHandler);
      advance();
      if (accept_op("*")) h.flags |= kExceptStar;
      if (!at_op(":")) {
        h.children.push_back(parse_test());
        if (accept_kw("as")) {
          h.value = std::string(expect_name().text);
        } else if (accept_op(",")) {
          fail_here("multiple exception types must be parenthesized");
        }
      } else {
        h.children.push_back(empty_node());
      }
      expect_op(":");
      h.children.push_back(parse_block());
      finish(h);
      n.children.push_back(std::move(h));
    }
    if (handlers && at_kw("else")) n.children.push_back(parse_else_clause(NodeKind::ElseClause, "else"));
    if (at_kw("finally")) {
      n.children.push_back(parse_else_clause(NodeKind::FinallyClause, "finally"));
    } else if (!handlers) {
      fail_here("expected 'except' or 'finally' block");
    }
    finish(n);
    return n;
  }

  bool parenthesized_with_items() const {
    if (!at_op("(")) return false;
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::Op && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
      if (t.kind == TokenKind::Op && (t.text == ")" || t.text == "]" || t.text == "}")) {
        if (--depth == 0) return i + 1 < toks_.size() && toks_[i + 1].is_op(":");
      }
      if (depth == 1 && t.is_name("as")) return true;
      if (t.kind == TokenKind::Newline) return false;
    }
    return false;
  }

  Node parse_with_item() {
    Node item = start(NodeKind::WithItem);
    item.children.push_back(parse_test());
    if (accept_kw("as")) {
      Node target = parse_target_elem();
      check_target(target, false);
      item.children.push_back(std::move(target));
    } else {
      item.children.push_back(empty_node());
    }
    finish(item);
    return item;
  }

  Node parse_with(const Token& first, bool is_async) {
    Node n = start(NodeKind::With, first);
    if (is_async) n.flags |= kAsync;
    expect_kw("with");
    if (parenthesized_with_items()) {
      advance();
      do {
        if (at_op(")")) break;
        n.children.push_back(parse_with_item());
      } while (accept_op(","));
      expect_op(")");
    } else {
      do {
        n.children.push_back(parse_with_item());
      } while (accept_op(","));
    }
    expect_op(":");
    n.children.push_back(parse_block());
    finish(n);
    return n;
  }

  Node empty_decorators() const {
    Node d = start(NodeKind::Decorators);
    d.range.end = d.range.begin;
    d.range.end_line = d.range.line;
    return d;
  }

  Node parse_decorated() {
    const Token& first = peek();
    Node decorators = start(NodeKind::Decorators);
    while (accept_op("@")) {
      decorators.children.push_back(parse_namedexpr_test());
      expect_newline();
    }
    finish(decorators);
    if (at_kw("def")) return parse_funcdef(first, std::move(decorators), false);
    if (at_kw("class")) return parse_classdef(first, std::move(decorators));
    if (at_kw("async")) return parse_async(first, std::move(decorators));
    fail_here("expected 'def' or 'class' after decorator");
  }

  Node parse_async(const Token& first, Node decorators) {
    expect_kw("async");
    if (at_kw("def")) return parse_funcdef(first, std::move(decorators), true);
    if (!decorators.children.empty()) fail_here();
    if (at_kw("for")) return parse_for(first, true);
    if (at_kw("with")) return parse_with(first, true);
    fail_here();
  }

  Node parse_param(bool allow_annotation) {
    Node p = start(NodeKind::Param);
    if (accept_op("*")) {
      p.flags |= kStarParam;
      if (at_op(",") || at_op(")") || at_op(":")) {
        p.children.push_back(empty_node());
        p.children.push_back(empty_node());
        finish(p);
        return p;
      }
    } else if (accept_op("**")) {
      p.flags |= kDStarParam;
    } else if (accept_op("/")) {
      p.flags |= kSlashParam;
      p.children.push_back(empty_node());
      p.children.push_back(empty_node());
      finish(p);
      return p;
    }
    p.value = std::string(expect_name().text);
    if (allow_annotation && accept_op(":")) {
      p.children.push_back(p.has(kStarParam) ? parse_star_or_test() : parse_test());
    } else {
      p.children.push_back(empty_node());
    }
    if (!p.has(kStarParam) && !p.has(kDStarParam) && accept_op("=")) {
      p.children.push_back(parse_test());
    } else {
      p.children.push_back(empty_node());
    }
    finish(p);
    return p;
  }

  Node parse_parameters(std::string_view close, bool allow_annotation) {
    Node args = start(NodeKind::Arguments);
    bool seen_default = false;
    bool seen_star = false;
    while (!at_op(close)) {
      Node p = parse_param(allow_annotation);
      if (p.has(kStarParam)) {
        if (seen_star) fail_here("* argument may appear only once");
        seen_star = true;
      } else if (!p.has(kDStarParam) && !p.has(kSlashParam) && !seen_star) {
        if (!p.children[1].empty()) {
          seen_default = true;
        } else if (seen_default) {
          fail_here("non-default argument follows default argument");
        }
      }
      const bool kwargs = p.has(kDStarParam);
      args.children.push_back(std::move(p));
      if (!accept_op(",")) break;
      if (kwargs && !at_op(close)) fail_here("arguments cannot follow var-keyword argument");
    }
    finish(args);
    return args;
  }

  Node parse_funcdef(const Token& first, Node decorators, bool is_async) {
    Node n = start(NodeKind::FunctionDef, first);
    if (is_async) n.flags |= kAsync;
    expect_kw("def");
    n.value = std::string(expect_name().text);
    n.children.push_back(std::move(decorators));
    expect_op("(");
    n.children.push_back(parse_parameters(")", true));
    expect_op(")");
    n.children.push_back(accept_op("->") ? parse_test() : empty_node());
    n.colon = expect_op(":").begin;
    n.children.push_back(parse_block());
    finish(n);
    return n;
  }

  Node parse_classdef(const Token& first, Node decorators) {
    Node n = start(NodeKind::ClassDef, first);
    expect_kw("class");
    n.value = std::string(expect_name().text);
    n.children.push_back(std::move(decorators));
    Node bases = start(NodeKind::CallArgs);
    if (accept_op("(")) {
      parse_call_arguments(bases);
      expect_op(")");
    }
    finish(bases);
    n.children.push_back(std::move(bases));
    n.colon = expect_op(":").begin;
    n.children.push_back(parse_block());
    finish(n);
    return n;
  }

  Node parse_pattern() {
    const bool saved = in_pattern_;
    in_pattern_ = true;
    Node pattern = parse_star_expressions();
    if (accept_kw("as")) {
      Node as = wrap(NodeKind::MatchAs, pattern);
      as.children.push_back(std::move(pattern));
      Node name = start(NodeKind::Name);
      name.value = std::string(expect_name().text);
      finish(name);
      as.children.push_back(std::move(name));
      finish(as);
      pattern = std::move(as);
    }
    in_pattern_ = saved;
    return pattern;
  }

  Node parse_match() {
    Node n = start(NodeKind::Match);
    advance();  // match
    n.children.push_back(parse_star_expressions());
    expect_op(":");
    expect_newline();
    if (!at(TokenKind::Indent)) fail_here("expected an indented block");
    advance();
    while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) {
      if (!at_soft_keyword("case")) fail_here("expected 'case'");
      Node c = start(NodeKind::MatchCase);
      advance();
      c.children.push_back(parse_pattern());
      c.children.push_back(accept_kw("if") ? parse_namedexpr_test() : empty_node());
      expect_op(":");
      c.children.push_back(parse_block());
      finish(c);
      n.children.push_back(std::move(c));
    }
    if (n.children.size() < 2) fail_here("expected 'case'");
    if (at(TokenKind::Dedent)) advance();
    finish(n);
    return n;
  }

  Node parse_dotted_name() {
    Node n = start(NodeKind::Alias);
    std::string name(expect_name().text);
    while (accept_op(".")) {
      name += '.';
      name += expect_name().text;
    }
    n.value = std::move(name);
    return n;
  }

  Node parse_small_statement() {
    const Token& t = peek();
    if (t.kind == TokenKind::Name) {
      if (t.text == "pass" || t.text == "break" || t.text == "continue") {
        Node n = start(t.text == "pass" ? NodeKind::Pass
                       : t.text == "break" ? NodeKind::Break
                                           : NodeKind::Continue);
        advance();
        finish(n);
        return n;
      }
      if (t.text == "return") {
        Node n = start(NodeKind::Return);
        advance();
        n.children.push_back(starts_expression(peek()) ? parse_star_expressions() : empty_node());
        finish(n);
        return n;
      }
      if (t.text == "raise") {
        Node n = start(NodeKind::Raise);
        advance();
        if (starts_expression(peek())) {
          n.children.push_back(parse_test());
          n.children.push_back(accept_kw("from") ? parse_test() : empty_node());
        } else {
          n.children.push_back(empty_node());
          n.children.push_back(empty_node());
        }
        finish(n);
        return n;
      }
      if (t.text == "global" || t.text == "nonlocal") {
        Node n = start(t.text == "global" ? NodeKind::Global : NodeKind::Nonlocal);
        advance();
        do {
          Node name = start(NodeKind::Name);
          name.value = std::string(expect_name().text);
          finish(name);
          n.children.push_back(std::move(name));
        } while (accept_op(","));
        finish(n);
        return n;
      }
      if (t.text == "del") {
        Node n = start(NodeKind::Delete);
        advance();
        do {
          if (!starts_expression(peek())) break;
          Node target = parse_expr();
          check_target(target, false);
          n.children.push_back(std::move(target));
        } while (accept_op(","));
        if (n.children.empty()) fail_here();
        finish(n);
        return n;
      }
      if (t.text == "assert") {
        Node n = start(NodeKind::Assert);
        advance();
        n.children.push_back(parse_test());
        n.children.push_back(accept_op(",") ? parse_test() : empty_node());
        finish(n);
        return n;
      }
      if (t.text == "import") {
        Node n = start(NodeKind::Import);
        advance();
        do {
          Node alias = parse_dotted_name();
          if (accept_kw("as")) alias.alt = std::string(expect_name().text);
          finish(alias);
          n.children.push_back(std::move(alias));
        } while (accept_op(","));
        finish(n);
        return n;
      }
      if (t.text == "from") return parse_import_from();
    }
    return parse_expression_statement();
  }

  Node parse_import_from() {
    Node n = start(NodeKind::ImportFrom);
    expect_kw("from");
    for (;;) {
      if (accept_op(".")) {
        n.level += 1;
      } else if (accept_op("...")) {
        n.level += 3;
      } else {
        break;
      }
    }
    if (!at_kw("import")) n.value = parse_dotted_name().value;
    if (n.level == 0 && n.value.empty()) fail_here();
    expect_kw("import");
    if (at_op("*")) {
      Node alias = start(NodeKind::Alias);
      advance();
      alias.value = "*";
      finish(alias);
      n.children.push_back(std::move(alias));
    } else {
      const bool paren = accept_op("(");
      do {
        if (paren && at_op(")")) break;
        Node alias = start(NodeKind::Alias);
        alias.value = std::string(expect_name().text);
        if (accept_kw("as")) alias.alt = std::string(expect_name().text);
        finish(alias);
        n.children.push_back(std::move(alias));
      } while (accept_op(","));
      if (paren) expect_op(")");
      if (n.children.empty()) fail_here();
    }
    finish(n);
    return n;
  }

  Node parse_assign_value() {
    if (at_kw("yield")) return parse_yield();
    return parse_star_expressions();
  }

  Node parse_expression_statement() {
    Node first = at_kw("yield") ? parse_yield() : parse_star_expressions();
    if (at_op(":")) {
      Node n = wrap(NodeKind::AnnAssign, first);
      advance();
      if (first.kind != NodeKind::Name && first.kind != NodeKind::Attribute &&
          first.kind != NodeKind::Subscript) {
        fail(peek(), "illegal target for annotation");
      }
      n.children.push_back(std::move(first));
      n.children.push_back(parse_test());
      n.children.push_back(accept_op("=") ? parse_assign_value() : empty_node());
      finish(n);
      return n;
    }
    if (is_aug_op(peek())) {
      Node n = wrap(NodeKind::AugAssign, first);
      n.value = std::string(advance().text);
      check_target(first, true);
      n.children.push_back(std::move(first));
      n.children.push_back(parse_assign_value());
      finish(n);
      return n;
    }
    if (at_op("=")) {
      Node n = wrap(NodeKind::Assign, first);
      n.children.push_back(std::move(first));
      while (accept_op("=")) n.children.push_back(parse_assign_value());
      for (std::size_t i = 0; i + 1 < n.children.size(); ++i) check_target(n.children[i], false);
      finish(n);
      return n;
    }
    Node n = wrap(NodeKind::ExprStmt, first);
    n.children.push_back(std::move(first));
    finish(n);
    return n;
  }

  void check_target(const Node& target, bool augmented) const {
    switch (target.kind) {
      case NodeKind::Name:
      case NodeKind::Attribute:
      case NodeKind::Subscript:
        return;
      case NodeKind::Starred:
        if (augmented) break;
        check_target(target.children.front(), false);
        return;
      case NodeKind::Tuple:
      case NodeKind::List:
        if (augmented) break;
        for (const Node& c : target.children) check_target(c, false);
        return;
      default:
        break;
    }
    throw SyntaxError(target.range.line, 1, "cannot assign to expression");
  }

  // ---- expressions ---------------------------------------------------------

  Node parse_star_or_test() {
    if (at_op("*")) return parse_star_expr();
    return parse_namedexpr_test();
  }

  Node parse_star_expr() {
    Node n = start(NodeKind::Starred);
    expect_op("*");
    n.children.push_back(parse_expr());
    finish(n);
    return n;
  }

  // star_expressions: comma-separated, producing a Tuple when a comma appears.
  Node parse_star_expressions() {
    Node first = parse_star_or_test();
    if (!at_op(",")) return first;
    Node tuple = wrap(NodeKind::Tuple, first);
    tuple.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression(peek())) break;
      tuple.children.push_back(parse_star_or_test());
    }
    finish(tuple);
    return tuple;
  }

  Node parse_target_elem() {
    if (at_op("*")) return parse_star_expr();
    return parse_expr();
  }

  Node parse_target_list() {
    Node first = parse_target_elem();
    if (!at_op(",")) return first;
    Node tuple = wrap(NodeKind::Tuple, first);
    tuple.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression(peek()) || at_kw("not") || at_kw("lambda")) break;
      tuple.children.push_back(parse_target_elem());
    }
    finish(tuple);
    return tuple;
  }

  Node parse_namedexpr_test() {
    if (at(TokenKind::Name) && peek(1).is_op(":=")) {
      Node n = start(NodeKind::NamedExpr);
      Node target = start(NodeKind::Name);
      target.value = std::string(expect_name().text);
      finish(target);
      n.children.push_back(std::move(target));
      advance();  // :=
      n.children.push_back(parse_test());
      finish(n);
      return n;
    }
    return parse_test();
  }

  Node parse_test() {
    if (at_kw("lambda")) return parse_lambda();
    Node body = parse_or_test();
    if (!in_pattern_ && at_kw("if")) {
      Node n = wrap(NodeKind::IfExp, body);
      advance();
      n.children.push_back(std::move(body));
      n.children.push_back(parse_or_test());
      expect_kw("else");
      n.children.push_back(parse_test());
      finish(n);
      return n;
    }
    return body;
  }

  Node parse_lambda() {
    Node n = start(NodeKind::Lambda);
    expect_kw("lambda");
    n.children.push_back(parse_parameters(":", false));
    expect_op(":");
    n.children.push_back(parse_test());
    finish(n);
    return n;
  }

  Node parse_bool(std::string_view op, Node (Parser::*sub)()) {
    Node first = (this->*sub)();
    if (!at_kw(op)) return first;
    Node n = wrap(NodeKind::BoolOp, first);
    n.value = std::string(op);
    n.children.push_back(std::move(first));
    while (accept_kw(op)) n.children.push_back((this->*sub)());
    finish(n);
    return n;
  }

  Node parse_or_test() { return parse_bool("or", &Parser::parse_and_test); }
  Node parse_and_test() { return parse_bool("and", &Parser::parse_not_test); }

  Node parse_not_test() {
    if (at_kw("not")) {
      Node n = start(NodeKind::UnaryOp);
      advance();
      n.value = "not";
      n.children.push_back(parse_not_test());
      finish(n);
      return n;
    }
    return parse_comparison();
  }

  std::string comparison_op() {
    const Token& t = peek();
    if (t.kind == TokenKind::Op) {
      if (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" ||
          t.text == "!=") {
        return std::string(t.text);
      }
      return {};
    }
    if (t.is_name("in")) return "in";
    if (t.is_name("not") && peek(1).is_name("in")) return "not in";
    if (t.is_name("is")) return peek(1).is_name("not") ? "is not" : "is";
    return {};
  }

  Node parse_comparison() {
    Node first = parse_expr();
    std::string op = comparison_op();
    if (op.empty()) return first;
    Node n = wrap(NodeKind::Compare, first);
    n.children.push_back(std::move(first));
    while (!op.empty()) {
      Node cmp = start(NodeKind::CmpOp);
      advance();
      if (op == "not in" || op == "is not") advance();
      cmp.value = op;
      finish(cmp);
      n.children.push_back(std::move(cmp));
      n.children.push_back(parse_expr());
      op = comparison_op();
    }
    finish(n);
    return n;
  }

  template <typename Pred>
  Node parse_binary(Pred is_op, Node (Parser::*sub)()) {
    Node left = (this->*sub)();
    while (peek().kind == TokenKind::Op && is_op(peek().text)) {
      Node n = wrap(NodeKind::BinOp, left);
      n.value = std::string(advance().text);
      n.children.push_back(std::move(left));
      n.children.push_back((this->*sub)());
      finish(n);
      left = std::move(n);
    }
    return left;
  }

  Node parse_expr() {
    return parse_binary([](std::string_view op) { return op == "|"; }, &Parser::parse_xor);
  }
  Node parse_xor() {
    return parse_binary([](std::string_view op) { return op == "^"; }, &Parser::parse_and);
  }
  Node parse_and() {
    return parse_binary([](std::string_view op) { return op == "&"; }, &Parser::parse_shift);
  }
  Node parse_shift() {
    return parse_binary([](std::string_view op) { return op == "<<" || op == ">>"; },
                        &Parser::parse_arith);
  }
  Node parse_arith() {
    return parse_binary([](std::string_view op) { return op == "+" || op == "-"; },
                        &Parser::parse_term);
  }
  Node parse_term() {
    return parse_binary(
        [](std::string_view op) {
          return op == "*" || op == "/" || op == "//" || op == "%" || op == "@";
        },
        &Parser::parse_factor);
  }

  Node parse_factor() {
    const Token& t = peek();
    if (t.is_op("+") || t.is_op("-") || t.is_op("~")) {
      Node n = start(NodeKind::UnaryOp);
      n.value = std::string(advance().text);
      n.children.push_back(parse_factor());
      finish(n);
      return n;
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_await_primary();
    if (!at_op("**")) return base;
    Node n = wrap(NodeKind::BinOp, base);
    n.value = std::string(advance().text);
    n.children.push_back(std::move(base));
    n.children.push_back(parse_factor());
    finish(n);
    return n;
  }

  Node parse_await_primary() {
    if (at_kw("await")) {
      Node n = start(NodeKind::Await);
      advance();
      n.children.push_back(parse_primary());
      finish(n);
      return n;
    }
    return parse_primary();
  }

  Node parse_primary() {
    Node node = parse_atom();
    for (;;) {
      if (at_op("(")) {
        Node call = wrap(NodeKind::Call, node);
        advance();
        call.children.push_back(std::move(node));
        parse_call_arguments(call);
        expect_op(")");
        finish(call);
        node = std::move(call);
      } else if (at_op("[")) {
        Node sub = wrap(NodeKind::Subscript, node);
        advance();
        sub.children.push_back(std::move(node));
        sub.children.push_back(parse_subscript_list());
        expect_op("]");
        finish(sub);
        node = std::move(sub);
      } else if (at_op(".")) {
        Node attr = wrap(NodeKind::Attribute, node);
        advance();
        attr.value = std::string(expect_name().text);
        attr.children.push_back(std::move(node));
        finish(attr);
        node = std::move(attr);
      } else {
        return node;
      }
    }
  }

  void parse_call_arguments(Node& call) {
    bool seen_keyword = false;
    while (!at_op(")")) {
      if (at_op("*")) {
        call.children.push_back(parse_star_expr());
      } else if (at_op("**")) {
        Node n = start(NodeKind::DoubleStarred);
        advance();
        n.children.push_back(parse_test());
        finish(n);
        call.children.push_back(std::move(n));
        seen_keyword = true;
      } else if (at(TokenKind::Name) && peek(1).is_op("=")) {
        Node kw = start(NodeKind::Keyword);
        kw.value = std::string(expect_name().text);
        advance();  // =
        kw.children.push_back(parse_test());
        finish(kw);
        call.children.push_back(std::move(kw));
        seen_keyword = true;
      } else {
        if (seen_keyword) fail_here("positional argument follows keyword argument");
        Node arg = parse_namedexpr_test();
        if (at_kw("for") || at_kw("async")) {
          Node gen = wrap(NodeKind::GeneratorExp, arg);
          gen.children.push_back(std::move(arg));
          parse_comprehensions(gen);
          finish(gen);
          arg = std::move(gen);
        }
        call.children.push_back(std::move(arg));
      }
      if (!accept_op(",")) break;
    }
  }

  Node parse_subscript() {
    Node lower = empty_node();
    const Token& first = peek();
    if (!at_op(":")) {
      lower = parse_namedexpr_test();
      if (!at_op(":")) return lower;
    }
    Node slice = start(NodeKind::Slice, first);
    expect_op(":");
    slice.children.push_back(std::move(lower));
    slice.children.push_back(at_op(":") || at_op("]") || at_op(",") ? empty_node() : parse_test());
    if (accept_op(":")) {
      slice.children.push_back(at_op("]") || at_op(",") ? empty_node() : parse_test());
    } else {
      slice.children.push_back(empty_node());
    }
    finish(slice);
    return slice;
  }

  Node parse_subscript_list() {
    Node first = parse_subscript();
    if (!at_op(",")) return first;
    Node tuple = wrap(NodeKind::Tuple, first);
    tuple.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      tuple.children.push_back(parse_subscript());
    }
    finish(tuple);
    return tuple;
  }

  void parse_comprehensions(Node& owner) {
    while (at_kw("for") || (at_kw("async") && peek(1).is_name("for"))) {
      Node comp = start(NodeKind::Comprehension);
      if (accept_kw("async")) comp.flags |= kAsync;
      expect_kw("for");
      Node target = parse_target_list();
      check_target(target, false);
      comp.children.push_back(std::move(target));
      expect_kw("in");
      comp.children.push_back(parse_or_test());
      while (accept_kw("if")) comp.children.push_back(parse_or_test());
      finish(comp);
      owner.children.push_back(std::move(comp));
    }
  }

  bool at_comprehension() const {
    return at_kw("for") || (at_kw("async") && peek(1).is_name("for"));
  }

  Node parse_yield() {
    Node n = start(NodeKind::Yield);
    expect_kw("yield");
    if (accept_kw("from")) {
      n.kind = NodeKind::YieldFrom;
      n.children.push_back(parse_test());
    } else if (starts_expression(peek())) {
      n.children.push_back(parse_star_expressions());
    } else {
      n.children.push_back(empty_node());
    }
    finish(n);
    return n;
  }

  Node parse_sequence(NodeKind list_kind, NodeKind comp_kind, std::string_view close,
                      const Token& open) {
    Node n = start(list_kind, open);
    Node first = parse_star_or_test();
    if (in_pattern_ && at_kw("as")) first = parse_as_pattern(std::move(first));
    if (at_comprehension()) {
      n.kind = comp_kind;
      n.children.push_back(std::move(first));
      parse_comprehensions(n);
      expect_op(close);
      finish(n);
      return n;
    }
    n.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(close)) break;
      Node next = parse_star_or_test();
      if (in_pattern_ && at_kw("as")) next = parse_as_pattern(std::move(next));
      n.children.push_back(std::move(next));
    }
    expect_op(close);
    finish(n);
    return n;
  }

  Node parse_as_pattern(Node pattern) {
    Node as = wrap(NodeKind::MatchAs, pattern);
    advance();  // as
    as.children.push_back(std::move(pattern));
    Node name = start(NodeKind::Name);
    name.value = std::string(expect_name().text);
    finish(name);
    as.children.push_back(std::move(name));
    finish(as);
    return as;
  }

  Node parse_paren(const Token& open) {
    if (at_op(")")) {
      Node t = start(NodeKind::Tuple, open);
      advance();
      finish(t);
      return t;
    }
    if (at_kw("yield")) {
      Node y = parse_yield();
      expect_op(")");
      return y;
    }
    Node first = parse_star_or_test();
    if (in_pattern_ && at_kw("as")) first = parse_as_pattern(std::move(first));
    if (at_comprehension()) {
      Node gen = start(NodeKind::GeneratorExp, open);
      gen.children.push_back(std::move(first));
      parse_comprehensions(gen);
      expect_op(")");
      finish(gen);
      return gen;
    }
    if (accept_op(")")) {
      if (first.kind == NodeKind::Starred) fail(open, "cannot use starred expression here");
      return first;
    }
    Node t = start(NodeKind::Tuple, open);
    t.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(")")) break;
      Node next = parse_star_or_test();
      if (in_pattern_ && at_kw("as")) next = parse_as_pattern(std::move(next));
      t.children.push_back(std::move(next));
    }
    expect_op(")");
    finish(t);
    return t;
  }

  Node parse_brace(const Token& open) {
    if (accept_op("}")) {
      Node d = start(NodeKind::Dict, open);
      finish(d);
      return d;
    }
    auto parse_dict_entry = [&]() -> Node {
      if (at_op("**")) {
        Node ds = start(NodeKind::DoubleStarred);
        advance();
        ds.children.push_back(parse_expr());
        finish(ds);
        return ds;
      }
      Node item = start(NodeKind::DictItem);
      item.children.push_back(parse_test());
      expect_op(":");
      item.children.push_back(parse_test());
      finish(item);
      return item;
    };

    if (at_op("**")) {
      Node d = start(NodeKind::Dict, open);
      do {
        if (at_op("}")) break;
        d.children.push_back(parse_dict_entry());
      } while (accept_op(","));
      expect_op("}");
      finish(d);
      return d;
    }
    Node first = parse_star_or_test();
    if (at_op(":") && first.kind != NodeKind::Starred) {
      Node d = start(NodeKind::Dict, open);
      Node item = wrap(NodeKind::DictItem, first);
      advance();
      item.children.push_back(std::move(first));
      item.children.push_back(parse_test());
      finish(item);
      if (at_comprehension()) {
        d.kind = NodeKind::DictComp;
        d.children.push_back(std::move(item.children[0]));
        d.children.push_back(std::move(item.children[1]));
        parse_comprehensions(d);
        expect_op("}");
        finish(d);
        return d;
      }
      d.children.push_back(std::move(item));
      while (accept_op(",")) {
        if (at_op("}")) break;
        d.children.push_back(parse_dict_entry());
      }
      expect_op("}");
      finish(d);
      return d;
    }
    Node s = start(NodeKind::Set, open);
    if (at_comprehension()) {
      s.kind = NodeKind::SetComp;
      s.children.push_back(std::move(first));
      parse_comprehensions(s);
      expect_op("}");
      finish(s);
      return s;
    }
    s.children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("}")) break;
      s.children.push_back(parse_star_or_test());
    }
    expect_op("}");
    finish(s);
    return s;
  }

  Node parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          Node c = start(NodeKind::Constant);
          c.value = std::string(advance().text);
          finish(c);
          return c;
        }
        if (is_keyword(t.text)) fail(t, "invalid syntax");
        Node n = start(NodeKind::Name);
        n.value = std::string(advance().text);
        finish(n);
        return n;
      }
      case TokenKind::Number: {
        Node c = start(NodeKind::Constant);
        c.value = std::string(advance().text);
        finish(c);
        return c;
      }
      case TokenKind::String: {
        Node c = start(NodeKind::Constant);
        const Token& first = t;
        const Token* last = &t;
        std::uint32_t flags = 0;
        while (at(TokenKind::String)) {
          const Token& s = advance();
          last = &s;
          std::uint32_t f = kStringLit;
          for (char ch : s.text) {
            if (ch == '"' || ch == '\'') break;
            const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            if (lower == 'f') f = kFString;
            if (lower == 'b') f = kBytesLit;
          }
          if ((flags & kBytesLit) != (f & kBytesLit) && flags != 0) {
            fail(s, "cannot mix bytes and nonbytes literals");
          }
          if (f == kFString || (flags & kFString) != 0) {
            flags = kFString;
          } else {
            flags = f;
          }
        }
        c.flags = flags;
        c.value = std::string(first.text.data(),
                              static_cast<std::size_t>(last->text.data() + last->text.size() -
                                                       first.text.data()));
        finish(c);
        return c;
      }
      case TokenKind::Op: {
        if (t.text == "...") {
          Node c = start(NodeKind::Constant);
          c.value = std::string(advance().text);
          finish(c);
          return c;
        }
        if (t.text == "(") {
          const Token& open = advance();
          return parse_paren(open);
        }
        if (t.text == "[") {
          const Token& open = advance();
          if (at_op("]")) {
            Node l = start(NodeKind::List, open);
            advance();
            finish(l);
            return l;
          }
          return parse_sequence(NodeKind::List, NodeKind::ListComp, "]", open);
        }
        if (t.text == "{") {
          const Token& open = advance();
          return parse_brace(open);
        }
        break;
      }
      default:
        break;
    }
    fail(t, t.kind == TokenKind::Newline || t.kind == TokenKind::EndMarker
                ? std::string("unexpected end of line")
                : "invalid syntax");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
  bool in_pattern_ = false;
};

}  // namespace

ParsedModule::ParsedModule(std::string source) : source_(std::move(source)) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < source_.size(); ++i) {
    if (source_[i] == '\n' && i + 1 < source_.size()) line_starts_.push_back(i + 1);
  }
  tokens_ = tokenize(source_);
  module_ = parse_tokens(tokens_);
}

std::size_t ParsedModule::line_begin(int line) const {
  if (line < 1) return 0;
  if (line > line_count()) return source_.size();
  return line_starts_[static_cast<std::size_t>(line - 1)];
}

std::size_t ParsedModule::line_end(int line) const {
  if (line >= line_count()) return source_.size();
  return line_starts_[static_cast<std::size_t>(line)];
}

Node parse_tokens(const std::vector<Token>& tokens) { return Parser(tokens).parse_module(); }

bool check_syntax(std::string_view source, std::string* error) {
  try {
    const auto tokens = tokenize(source);
    (void)parse_tokens(tokens);
    return true;
  } catch (const SyntaxError& e) {
    if (error != nullptr) *error = e.what();
    return false;
  }
}

}  // namespace breakpoint::python
