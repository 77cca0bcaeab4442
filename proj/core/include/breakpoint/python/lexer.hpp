#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace breakpoint::python {

enum class TokenKind {
  Name,
  Number,
  String,
  Op,
  Newline,  // end of a logical line
  Indent,
  Dedent,
  Comment,
  Nl,  // non-logical line break (blank line, comment line, inside brackets)
  EndMarker,
};

struct Token {
  TokenKind kind;
  std::string_view text;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
  int line = 0;  // 1-based
  int column = 0;  // 0-based byte column
  int end_line = 0;

  bool is_op(std::string_view op) const { return kind == TokenKind::Op && text == op; }
  bool is_name(std::string_view name) const { return kind == TokenKind::Name && text == name; }
};

/// Tokenizes Python 3 source following the reference tokenizer's INDENT/DEDENT
/// rules. Token text views point into `source`, which must outlive the result.
/// Throws SyntaxError on unterminated strings, unbalanced brackets and
/// inconsistent dedents.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word) noexcept;

}  // namespace breakpoint::python
