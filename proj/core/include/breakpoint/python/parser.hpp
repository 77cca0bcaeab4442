#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "breakpoint/python/ast.hpp"
#include "breakpoint/python/lexer.hpp"

namespace breakpoint::python {

/// A parsed module. Owns its source so token views stay valid.
class ParsedModule {
 public:
  explicit ParsedModule(std::string source);

  ParsedModule(const ParsedModule&) = delete;
  ParsedModule& operator=(const ParsedModule&) = delete;
  ParsedModule(ParsedModule&&) = delete;
  ParsedModule& operator=(ParsedModule&&) = delete;

  const std::string& source() const { return source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Node& module() const { return module_; }

  /// Byte offset of the first character of 1-based `line`.
  std::size_t line_begin(int line) const;
  /// Byte offset just past the newline terminating `line` (or end of source).
  std::size_t line_end(int line) const;
  int line_count() const { return static_cast<int>(line_starts_.size()); }

  std::string_view text(const SourceRange& range) const {
    return std::string_view(source_).substr(range.begin, range.end - range.begin);
  }

 private:
  std::string source_;
  std::vector<std::size_t> line_starts_;
  std::vector<Token> tokens_;
  Node module_;
};

/// Parses Python 3.10 source; throws SyntaxError.
Node parse_tokens(const std::vector<Token>& tokens);

/// True when `source` parses; `error` receives the diagnostic otherwise.
bool check_syntax(std::string_view source, std::string* error = nullptr);

}  // namespace breakpoint::python
