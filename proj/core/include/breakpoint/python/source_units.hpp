#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoint/python/parser.hpp"

namespace breakpoint {

enum class UnitKind { Function, Method, Class };

std::string_view to_string(UnitKind kind) noexcept;
std::optional<UnitKind> unit_kind_from_string(std::string_view s) noexcept;

namespace python {

/// Location of one function, method or class inside a parsed module.
///
/// The unit occupies whole lines [start_line, end_line]; its text is
/// source[begin, end). That text splits into three contiguous pieces:
/// signature = [begin, signature_end), docstring = [signature_end,
/// docstring_end), body = [docstring_end, end). Decorators belong to the
/// signature.
struct UnitSlice {
  std::string qualname;
  UnitKind kind = UnitKind::Function;
  int start_line = 0;
  int end_line = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t signature_end = 0;
  std::size_t docstring_end = 0;
  const Node* node = nullptr;  // FunctionDef / ClassDef inside the module
  const Node* docstring = nullptr;  // docstring statement, if any
};

/// Top-level functions and classes plus (recursively) methods and nested
/// classes of classes. Duplicate qualified names in one module (property
/// setters, conditional redefinitions) get a "#2", "#3"... suffix in order of
/// appearance.
std::vector<UnitSlice> extract_units(const ParsedModule& module);

/// Statements making up the unit body, with the docstring statement removed.
std::vector<const Node*> body_statements(const UnitSlice& unit);

/// Removes the longest common leading whitespace of all non-blank lines.
std::string dedent(std::string_view text);

/// Re-indents `text` (dedented first) so its first line starts at `indent`.
/// The result always ends with a newline.
std::string reindent(std::string_view text, std::string_view indent);

/// Leading whitespace of the line containing `offset`.
std::string line_indent(std::string_view source, std::size_t offset);

/// Checks that `text` is exactly one (possibly decorated) def/class named
/// `name`. Returns an empty string on success, a diagnostic otherwise.
std::string validate_unit_source(std::string_view text, std::string_view name);

/// Source of the unit's header (decorators + def/class line(s)), dedented and
/// with trailing whitespace stripped.
std::string normalized_signature(std::string_view unit_text);

/// Replaces the unit `qualname` in `module_source` with `unit_text`, re-indented
/// to the original position. Throws Error(UnknownUnit) when not found.
std::string replace_unit(const std::string& module_source, std::string_view qualname,
                         std::string_view unit_text);

}  // namespace python
}  // namespace breakpoint
