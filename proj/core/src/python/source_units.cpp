#include "breakpoint/python/source_units.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "breakpoint/error.hpp"

namespace breakpoint {

std::string_view to_string(UnitKind kind) noexcept {
  switch (kind) {
    case UnitKind::Function: return "function";
    case UnitKind::Method: return "method";
    case UnitKind::Class: return "class";
  }
  return "function";
}

std::optional<UnitKind> unit_kind_from_string(std::string_view s) noexcept {
  if (s == "function") return UnitKind::Function;
  if (s == "method") return UnitKind::Method;
  if (s == "class") return UnitKind::Class;
  return std::nullopt;
}

namespace python {
namespace {

// Offset just past the end of the line when only whitespace or a comment
// follows `offset`; otherwise `offset` itself.
std::size_t extend_to_line_end(std::string_view src, std::size_t offset) {
  std::size_t p = offset;
  while (p < src.size() && (src[p] == ' ' || src[p] == '\t' || src[p] == '\f')) ++p;
  if (p < src.size() && src[p] == '#') {
    while (p < src.size() && src[p] != '\n') ++p;
  }
  if (p >= src.size()) return src.size();
  if (src[p] == '\r' && p + 1 < src.size() && src[p + 1] == '\n') return p + 2;
  if (src[p] == '\n') return p + 1;
  return offset;
}

const Node* unit_block(const Node& def) { return &def.children.back(); }

const Node* find_docstring(const Node& def) {
  const Node* block = unit_block(def);
  if (block->children.empty()) return nullptr;
  const Node& first = block->children.front();
  if (first.kind != NodeKind::ExprStmt) return nullptr;
  const Node& expr = first.children.front();
  if (expr.kind == NodeKind::Constant && expr.has(kStringLit)) return &first;
  return nullptr;
}

void collect(const ParsedModule& module, const Node& container, const std::string& prefix,
             bool in_class, std::vector<UnitSlice>& out) {
  for (const Node& stmt : container.children) {
    if (stmt.kind != NodeKind::FunctionDef && stmt.kind != NodeKind::ClassDef) continue;
    UnitSlice u;
    u.qualname = prefix.empty() ? stmt.value : prefix + "." + stmt.value;
    if (stmt.kind == NodeKind::ClassDef) {
      u.kind = UnitKind::Class;
    } else {
      u.kind = in_class ? UnitKind::Method : UnitKind::Function;
    }
    u.node = &stmt;
    u.start_line = stmt.range.line;
    u.end_line = stmt.range.end_line;
    u.begin = module.line_begin(u.start_line);
    u.end = module.line_end(u.end_line);
    const std::string_view src = module.source();
    u.signature_end = extend_to_line_end(src, stmt.colon + 1);
    u.docstring = find_docstring(stmt);
    u.docstring_end = u.signature_end;
    if (u.docstring != nullptr) {
      u.docstring_end = std::max(u.signature_end, extend_to_line_end(src, u.docstring->range.end));
    }
    u.docstring_end = std::min(u.docstring_end, u.end);
    u.signature_end = std::min(u.signature_end, u.end);
    out.push_back(std::move(u));
    if (stmt.kind == NodeKind::ClassDef) {
      const std::string qualname = out.back().qualname;
      collect(module, *unit_block(stmt), qualname, true, out);
    }
  }
}

}  // namespace

std::vector<UnitSlice> extract_units(const ParsedModule& module) {
  std::vector<UnitSlice> units;
  collect(module, module.module(), "", false, units);
  std::map<std::string, int> seen;
  for (UnitSlice& u : units) {
    const int n = ++seen[u.qualname];
    if (n > 1) u.qualname += "#" + std::to_string(n);
  }
  return units;
}

std::vector<const Node*> body_statements(const UnitSlice& unit) {
  std::vector<const Node*> out;
  for (const Node& stmt : unit_block(*unit.node)->children) {
    if (&stmt == unit.docstring) continue;
    out.push_back(&stmt);
  }
  return out;
}

namespace {

std::vector<std::string_view> split_lines_keep(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size() - 1;
    lines.push_back(text.substr(start, nl - start + 1));
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n\f") == std::string_view::npos;
}

}  // namespace

std::string dedent(std::string_view text) {
  const auto lines = split_lines_keep(text);
  std::optional<std::string_view> common;
  for (std::string_view line : lines) {
    if (is_blank(line)) continue;
    const std::size_t n = line.find_first_not_of(" \t");
    const std::string_view ws = line.substr(0, n);
    if (!common) {
      common = ws;
    } else {
      std::size_t k = 0;
      while (k < common->size() && k < ws.size() && (*common)[k] == ws[k]) ++k;
      common = common->substr(0, k);
    }
  }
  const std::size_t cut = common ? common->size() : 0;
  std::string out;
  out.reserve(text.size());
  for (std::string_view line : lines) {
    if (is_blank(line)) {
      const bool has_nl = !line.empty() && line.back() == '\n';
      if (has_nl) out.push_back('\n');
      continue;
    }
    out.append(line.substr(cut));
  }
  return out;
}

std::string reindent(std::string_view text, std::string_view indent) {
  const std::string flat = dedent(text);
  std::string out;
  out.reserve(flat.size() + indent.size() * 8);
  for (std::string_view line : split_lines_keep(flat)) {
    if (!is_blank(line)) out.append(indent);
    out.append(line);
  }
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  return out;
}

std::string line_indent(std::string_view source, std::size_t offset) {
  std::size_t start = offset;
  while (start > 0 && source[start - 1] != '\n') --start;
  std::size_t p = start;
  while (p < source.size() && (source[p] == ' ' || source[p] == '\t')) ++p;
  return std::string(source.substr(start, p - start));
}

std::string validate_unit_source(std::string_view text, std::string_view name) {
  std::unique_ptr<ParsedModule> parsed;
  try {
    parsed = std::make_unique<ParsedModule>(dedent(text));
  } catch (const SyntaxError& e) {
    return e.what();
  }
  const Node& mod = parsed->module();
  if (mod.children.size() != 1) {
    return "expected exactly one function or class definition, found " +
           std::to_string(mod.children.size()) + " statements";
  }
  const Node& def = mod.children.front();
  if (def.kind != NodeKind::FunctionDef && def.kind != NodeKind::ClassDef) {
    return "expected a function or class definition";
  }
  if (def.value != name) {
    return "definition is named '" + def.value + "', expected '" + std::string(name) + "'";
  }
  return {};
}

std::string normalized_signature(std::string_view unit_text) {
  const std::string flat = dedent(unit_text);
  ParsedModule parsed(flat);
  const auto units = extract_units(parsed);
  if (units.empty()) return {};
  std::string sig = flat.substr(units.front().begin, units.front().signature_end - units.front().begin);
  while (!sig.empty() && (sig.back() == '\n' || sig.back() == ' ' || sig.back() == '\t' ||
                          sig.back() == '\r')) {
    sig.pop_back();
  }
  return sig;
}

std::string replace_unit(const std::string& module_source, std::string_view qualname,
                         std::string_view unit_text) {
  ParsedModule parsed(module_source);
  for (const UnitSlice& u : extract_units(parsed)) {
    if (u.qualname != qualname) continue;
    const std::string indent = line_indent(module_source, u.begin);
    std::string out = module_source.substr(0, u.begin);
    if (line_indent(unit_text, 0) == indent) {
      // Already at the right depth: keep string literals untouched.
      out += unit_text;
      if (out.empty() || out.back() != '\n') out.push_back('\n');
    } else {
      out += reindent(unit_text, indent);
    }
    out += module_source.substr(u.end);
    return out;
  }
  throw Error(Errc::UnknownUnit, std::string(qualname));
}

}  // namespace python
}  // namespace breakpoint
