#include "breakpoint/python/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "breakpoint/error.hpp"

namespace breakpoint::python {
namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async", "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",  "yield"};

constexpr std::array<std::string_view, 3> kOps3 = {"**=", "//=", "..."};
constexpr std::array<std::string_view, 21> kOps3b = {">>=", "<<=", "->", ":=", "**", "//", "<<",
                                                     ">>", "<=", ">=", "==", "!=", "+=", "-=",
                                                     "*=", "/=", "%=", "&=", "|=", "^=", "@="};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:;.=";

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && brackets_.empty()) {
        if (handle_line_start()) continue;
      }
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        lex_comment();
      } else if (c == '\n' || c == '\r') {
        lex_newline();
      } else if (c == '\\') {
        lex_continuation();
      } else if (is_ident_start(static_cast<unsigned char>(c))) {
        lex_name_or_prefixed_string();
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
      } else if (c == '"' || c == '\'') {
        lex_string(pos_, pos_);
      } else {
        lex_operator();
      }
    }
    if (!brackets_.empty()) {
      const Token& open = tokens_[open_positions_.back()];
      throw SyntaxError(open.line, open.column + 1, "'" + std::string(1, brackets_.back()) +
                                                        "' was never closed");
    }
    if (line_has_tokens_) emit(TokenKind::Newline, pos_, pos_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(TokenKind::Dedent, pos_, pos_);
    }
    emit(TokenKind::EndMarker, pos_, pos_);
    return std::move(tokens_);
  }

 private:
  void emit(TokenKind kind, std::size_t begin, std::size_t end, int start_line = -1) {
    Token tok;
    tok.kind = kind;
    tok.begin = begin;
    tok.end = end;
    tok.text = src_.substr(begin, end - begin);
    tok.line = start_line < 0 ? line_ : start_line;
    tok.column = static_cast<int>(begin - (start_line < 0 ? line_start_ : tok_line_start_));
    tok.end_line = line_;
    tokens_.push_back(tok);
    if (kind == TokenKind::Name || kind == TokenKind::Number || kind == TokenKind::String ||
        kind == TokenKind::Op) {
      line_has_tokens_ = true;
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(line_, static_cast<int>(pos_ - line_start_) + 1, message);
  }

  void advance_line(std::size_t after_newline) {
    pos_ = after_newline;
    ++line_;
    line_start_ = pos_;
  }

  std::size_t newline_end(std::size_t p) const {
    if (src_[p] == '\r' && p + 1 < src_.size() && src_[p + 1] == '\n') return p + 2;
    return p + 1;
  }

  // Returns true when the whole line was consumed (blank or comment-only).
  bool handle_line_start() {
    int col = 0;
    std::size_t p = pos_;
    for (; p < src_.size(); ++p) {
      const char c = src_[p];
      if (c == ' ') {
        ++col;
      } else if (c == '\t') {
        col = (col / 8 + 1) * 8;
      } else if (c == '\f') {
        col = 0;
      } else {
        break;
      }
    }
    if (p >= src_.size()) {
      pos_ = p;
      return true;
    }
    const char c = src_[p];
    if (c == '#' || c == '\n' || c == '\r') {
      pos_ = p;
      if (c == '#') lex_comment();
      if (pos_ < src_.size()) {
        const std::size_t end = newline_end(pos_);
        emit(TokenKind::Nl, pos_, end);
        advance_line(end);
      }
      return true;
    }
    at_line_start_ = false;
    pos_ = p;
    if (col > indents_.back()) {
      indents_.push_back(col);
      emit(TokenKind::Indent, line_start_, p);
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, p, p);
      }
      if (col != indents_.back()) fail("unindent does not match any outer indentation level");
    }
    return false;
  }

  void lex_comment() {
    const std::size_t begin = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
    emit(TokenKind::Comment, begin, pos_);
  }

  void lex_newline() {
    const std::size_t end = newline_end(pos_);
    if (brackets_.empty() && line_has_tokens_) {
      emit(TokenKind::Newline, pos_, end);
      line_has_tokens_ = false;
    } else {
      emit(TokenKind::Nl, pos_, end);
    }
    advance_line(end);
    at_line_start_ = brackets_.empty();
  }

  void lex_continuation() {
    const std::size_t next = pos_ + 1;
    if (next < src_.size() && (src_[next] == '\n' || src_[next] == '\r')) {
      advance_line(newline_end(next));
      if (pos_ >= src_.size()) fail("unexpected EOF after line continuation");
      return;
    }
    fail("unexpected character after line continuation character");
  }

  void lex_name_or_prefixed_string() {
    const std::size_t begin = pos_;
    std::size_t p = pos_;
    while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
    const std::string_view word = src_.substr(begin, p - begin);
    if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'') && word.size() <= 2 &&
        is_string_prefix(word)) {
      lex_string(begin, p);
      return;
    }
    pos_ = p;
    emit(TokenKind::Name, begin, p);
  }

  void lex_number() {
    const std::size_t begin = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < src_.size() && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
    };
    auto is_dec = [](unsigned char c) { return std::isdigit(c) != 0; };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      pos_ += 2;
      digits([](unsigned char c) { return std::isxdigit(c) != 0; });
    } else {
      digits(is_dec);
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        digits(is_dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
          pos_ = p;
          digits(is_dec);
        }
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
    }
    emit(TokenKind::Number, begin, pos_);
  }

  // `begin` is the start of the prefix, `quote_pos` the opening quote.
  void lex_string(std::size_t begin, std::size_t quote_pos) {
    const int start_line = line_;
    tok_line_start_ = line_start_;
    const char q = src_[quote_pos];
    const bool triple = quote_pos + 2 < src_.size() && src_[quote_pos + 1] == q && src_[quote_pos + 2] == q;
    pos_ = quote_pos + (triple ? 3 : 1);
    for (;;) {
      if (pos_ >= src_.size()) {
        throw SyntaxError(start_line, static_cast<int>(begin - tok_line_start_) + 1,
                          triple ? "unterminated triple-quoted string literal"
                                 : "unterminated string literal");
      }
      const char c = src_[pos_];
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
          advance_line(newline_end(pos_ + 1));
        } else {
          pos_ += 2;
        }
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (!triple) {
          throw SyntaxError(start_line, static_cast<int>(begin - tok_line_start_) + 1,
                            "unterminated string literal");
        }
        advance_line(newline_end(pos_));
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    emit(TokenKind::String, begin, pos_, start_line);
  }

  void lex_operator() {
    const std::string_view rest = src_.substr(pos_);
    std::size_t len = 0;
    for (auto op : kOps3) {
      if (rest.substr(0, op.size()) == op) len = op.size();
    }
    if (len == 0) {
      for (auto op : kOps3b) {
        if (rest.substr(0, op.size()) == op) {
          len = op.size();
          break;
        }
      }
    }
    if (len == 0 && kOps1.find(rest.front()) != std::string_view::npos) len = 1;
    if (len == 0) fail(std::string("invalid character '") + rest.front() + "'");

    const std::size_t begin = pos_;
    pos_ += len;
    const char c = rest.front();
    if (len == 1 && (c == '(' || c == '[' || c == '{')) {
      brackets_.push_back(c);
      open_positions_.push_back(tokens_.size());
    } else if (len == 1 && (c == ')' || c == ']' || c == '}')) {
      const char want = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (brackets_.empty()) fail(std::string("unmatched '") + c + "'");
      if (brackets_.back() != want) {
        fail(std::string("closing parenthesis '") + c + "' does not match opening parenthesis '" +
             brackets_.back() + "'");
      }
      brackets_.pop_back();
      open_positions_.pop_back();
    }
    emit(TokenKind::Op, begin, pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  std::size_t tok_line_start_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<int> indents_{0};
  std::vector<char> brackets_;
  std::vector<std::size_t> open_positions_;
  std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view word) noexcept {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace breakpoint::python
