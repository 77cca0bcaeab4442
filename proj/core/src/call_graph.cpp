#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "breakpoint/repo_model.hpp"

namespace breakpoint {
namespace {

using python::Node;
using python::NodeKind;

const std::unordered_set<std::string>& builtin_names() {
  static const std::unordered_set<std::string> names = {
      "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray",
      "bytes", "callable", "chr", "classmethod", "compile", "complex", "delattr", "dict", "dir",
      "divmod", "enumerate", "eval", "exec", "filter", "float", "format", "frozenset", "getattr",
      "globals", "hasattr", "hash", "help", "hex", "id", "input", "int", "isinstance",
      "issubclass", "iter", "len", "list", "locals", "map", "max", "memoryview", "min", "next",
      "object", "oct", "open", "ord", "pow", "print", "property", "range", "repr", "reversed",
      "round", "set", "setattr", "slice", "sorted", "staticmethod", "str", "sum", "super",
      "tuple", "type", "vars", "zip", "__import__", "Exception", "BaseException", "ValueError",
      "TypeError", "KeyError", "IndexError", "AttributeError", "RuntimeError", "NotImplementedError",
      "StopIteration", "OSError", "IOError", "ZeroDivisionError", "AssertionError", "LookupError",
      "ArithmeticError", "ImportError", "ModuleNotFoundError", "NameError", "FileNotFoundError",
      "PermissionError", "TimeoutError", "UnicodeDecodeError", "UnicodeEncodeError", "OverflowError",
      "RecursionError", "StopAsyncIteration", "SystemExit", "KeyboardInterrupt", "Warning",
      "UserWarning", "DeprecationWarning"};
  return names;
}

// What a name bound by an import statement refers to.
struct Binding {
  enum Kind { Module, Symbol } kind = Module;
  std::string module;  // absolute dotted module
  std::string name;    // for Symbol
};

struct ModuleInfo {
  std::string path;
  bool is_package = false;
  std::map<std::string, std::size_t> top_units;  // top-level def/class name -> unit index
  std::map<std::string, Binding> imports;
  std::set<std::string> assigned;  // other module-level names (assignments)
};

// Result of resolving an expression to something in (or outside) the repo.
struct Target {
  enum Kind { None, Unit, Module, External } kind = None;
  std::vector<std::size_t> units;
  std::string module;
};

std::string dotted(const Node& n) {
  if (n.kind == NodeKind::Name) return n.value;
  if (n.kind == NodeKind::Attribute) {
    const std::string base = dotted(n.children.front());
    return base.empty() ? std::string() : base + "." + n.value;
  }
  return {};
}

std::string resolve_relative(const ModuleInfo& mod, const std::string& self_name, int level,
                             const std::string& target) {
  if (level == 0) return target;
  std::string pkg = mod.is_package ? self_name : self_name.substr(0, self_name.rfind('.') == std::string::npos
                                                                        ? 0
                                                                        : self_name.rfind('.'));
  for (int i = 1; i < level; ++i) {
    const auto dot = pkg.rfind('.');
    pkg = dot == std::string::npos ? std::string() : pkg.substr(0, dot);
  }
  if (target.empty()) return pkg;
  return pkg.empty() ? target : pkg + "." + target;
}

void collect_import(const Node& stmt, const ModuleInfo& mod, const std::string& self_name,
                    std::map<std::string, Binding>& out) {
  if (stmt.kind == NodeKind::Import) {
    for (const Node& alias : stmt.children) {
      if (!alias.alt.empty()) {
        out[alias.alt] = {Binding::Module, alias.value, {}};
      } else {
        const std::string head = alias.value.substr(0, alias.value.find('.'));
        out[head] = {Binding::Module, head, {}};
      }
    }
  } else if (stmt.kind == NodeKind::ImportFrom) {
    const std::string from = resolve_relative(mod, self_name, stmt.level, stmt.value);
    for (const Node& alias : stmt.children) {
      if (alias.value == "*") continue;
      out[alias.alt.empty() ? alias.value : alias.alt] = {Binding::Symbol, from, alias.value};
    }
  }
}

class Resolver {
 public:
  explicit Resolver(const Repository& repo) : repo_(repo) {}

  CallGraph run();

 private:
  struct Parsed {
    std::unique_ptr<python::ParsedModule> module;
    std::vector<python::UnitSlice> slices;
    std::string name;
  };

  Target resolve_symbol(const std::string& module, const std::string& name, int depth) const;
  Target resolve_expr(const Node& expr, const ModuleInfo& mod, const std::set<std::string>& locals,
                      const std::map<std::string, Binding>& local_imports) const;
  std::vector<std::size_t> lookup_method(std::size_t cls, const std::string& name) const;
  bool repo_module(const std::string& name) const;
  void index_classes();
  void resolve_unit(std::size_t unit, const Parsed& parsed, const python::UnitSlice& slice);

  const Repository& repo_;
  std::vector<Parsed> files_;
  std::map<std::string, ModuleInfo> modules_;
  std::vector<std::string> unit_module_;
  std::vector<std::string> unit_class_;  // enclosing class qualname for methods, "" otherwise
  std::map<std::string, std::vector<std::size_t>> global_names_;
  std::map<std::string, std::vector<std::size_t>> method_names_;
  std::map<std::pair<std::string, std::string>, std::size_t> by_qualname_;  // (module, qualname)
  std::map<std::size_t, std::vector<std::size_t>> class_bases_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::pair<std::string, std::string>> unresolved_;
};

// Modules of the repository, including namespace packages without __init__.py.
bool Resolver::repo_module(const std::string& name) const {
  if (modules_.count(name)) return true;
  const auto it = modules_.lower_bound(name + ".");
  return it != modules_.end() && it->first.compare(0, name.size() + 1, name + ".") == 0;
}

Target Resolver::resolve_symbol(const std::string& module, const std::string& name, int depth) const {
  Target t;
  const auto mit = modules_.find(module);
  if (mit == modules_.end()) {
    if (repo_module(module.empty() ? name : module + "." + name)) {
      t.kind = Target::Module;
      t.module = module.empty() ? name : module + "." + name;
      return t;
    }
    t.kind = Target::External;
    return t;
  }
  const ModuleInfo& mod = mit->second;
  if (auto u = mod.top_units.find(name); u != mod.top_units.end()) {
    t.kind = Target::Unit;
    t.units = {u->second};
    return t;
  }
  if (auto b = mod.imports.find(name); b != mod.imports.end() && depth < 5) {
    if (b->second.kind == Binding::Module) {
      t.kind = repo_module(b->second.module) ? Target::Module : Target::External;
      t.module = b->second.module;
      return t;
    }
    return resolve_symbol(b->second.module, b->second.name, depth + 1);
  }
  const std::string sub = module.empty() ? name : module + "." + name;
  if (repo_module(sub)) {
    t.kind = Target::Module;
    t.module = sub;
  }
  return t;
}

std::vector<std::size_t> Resolver::lookup_method(std::size_t cls, const std::string& name) const {
  std::vector<std::size_t> queue{cls};
  std::set<std::size_t> seen{cls};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const std::size_t c = queue[i];
    const std::string qual = std::string(repo_.units[c].qualname()) + "." + name;
    if (auto it = by_qualname_.find({unit_module_[c], qual}); it != by_qualname_.end()) {
      return {it->second};
    }
    if (auto b = class_bases_.find(c); b != class_bases_.end()) {
      for (std::size_t base : b->second) {
        if (seen.insert(base).second) queue.push_back(base);
      }
    }
  }
  return {};
}

Target Resolver::resolve_expr(const Node& expr, const ModuleInfo& mod,
                              const std::set<std::string>& locals,
                              const std::map<std::string, Binding>& local_imports) const {
  Target t;
  if (expr.kind == NodeKind::Name) {
    const std::string& name = expr.value;
    if (auto b = local_imports.find(name); b != local_imports.end()) {
      if (b->second.kind == Binding::Module) {
        t.kind = repo_module(b->second.module) ? Target::Module : Target::External;
        t.module = b->second.module;
        return t;
      }
      return resolve_symbol(b->second.module, b->second.name, 1);
    }
    if (locals.count(name)) return t;
    if (auto u = mod.top_units.find(name); u != mod.top_units.end()) {
      t.kind = Target::Unit;
      t.units = {u->second};
      return t;
    }
    if (auto b = mod.imports.find(name); b != mod.imports.end()) {
      if (b->second.kind == Binding::Module) {
        t.kind = repo_module(b->second.module) ? Target::Module : Target::External;
        t.module = b->second.module;
        return t;
      }
      return resolve_symbol(b->second.module, b->second.name, 1);
    }
    if (mod.assigned.count(name) || builtin_names().count(name)) return t;
    if (auto g = global_names_.find(name); g != global_names_.end()) {
      t.kind = Target::Unit;
      t.units = g->second;
    }
    return t;
  }
  if (expr.kind == NodeKind::Attribute) {
    const Target base = resolve_expr(expr.children.front(), mod, locals, local_imports);
    if (base.kind == Target::External) return base;
    if (base.kind == Target::Module) return resolve_symbol(base.module, expr.value, 1);
    if (base.kind == Target::Unit && base.units.size() == 1 &&
        repo_.units[base.units.front()].kind == UnitKind::Class) {
      t.units = lookup_method(base.units.front(), expr.value);
      if (!t.units.empty()) t.kind = Target::Unit;
      return t;
    }
  }
  return t;
}

void Resolver::index_classes() {
  for (std::size_t f = 0; f < files_.size(); ++f) {
    const Parsed& p = files_[f];
    const ModuleInfo& mod = modules_.at(p.name);
    for (const python::UnitSlice& s : p.slices) {
      if (s.kind != UnitKind::Class) continue;
      const std::size_t cls = by_qualname_.at({p.name, s.qualname});
      for (const Node& base : s.node->children[1].children) {
        if (base.kind != NodeKind::Name && base.kind != NodeKind::Attribute) continue;
        const Target t = resolve_expr(base, mod, {}, {});
        if (t.kind != Target::Unit) continue;
        for (std::size_t u : t.units) {
          if (repo_.units[u].kind == UnitKind::Class && u != cls) class_bases_[cls].push_back(u);
        }
      }
    }
  }
}

// Names bound inside a function body (parameters, assignment targets,
// loop/with/except targets, nested definitions).
void collect_locals(const Node& n, std::set<std::string>& out, bool top) {
  switch (n.kind) {
    case NodeKind::Param:
      if (!n.value.empty()) out.insert(n.value);
      break;
    case NodeKind::FunctionDef:
    case NodeKind::ClassDef:
      if (!top) out.insert(n.value);
      break;
    case NodeKind::ExceptHandler:
      if (!n.value.empty()) out.insert(n.value);
      break;
    case NodeKind::Global:
    case NodeKind::Nonlocal:
      return;
    default:
      break;
  }
  auto bind_target = [&](const Node& t, auto&& self) -> void {
    if (t.kind == NodeKind::Name) {
      out.insert(t.value);
    } else if (t.kind == NodeKind::Tuple || t.kind == NodeKind::List || t.kind == NodeKind::Starred) {
      for (const Node& c : t.children) self(c, self);
    }
  };
  switch (n.kind) {
    case NodeKind::Assign:
      for (std::size_t i = 0; i + 1 < n.children.size(); ++i) bind_target(n.children[i], bind_target);
      break;
    case NodeKind::AugAssign:
    case NodeKind::AnnAssign:
    case NodeKind::For:
    case NodeKind::Comprehension:
    case NodeKind::NamedExpr:
      bind_target(n.children.front(), bind_target);
      break;
    case NodeKind::WithItem:
      if (n.children.size() > 1 && !n.children[1].empty()) bind_target(n.children[1], bind_target);
      break;
    case NodeKind::MatchAs:
      bind_target(n.children.back(), bind_target);
      break;
    default:
      break;
  }
  for (const Node& c : n.children) collect_locals(c, out, false);
}

void collect_global_decls(const Node& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::Global) {
    for (const Node& c : n.children) out.insert(c.value);
  }
  for (const Node& c : n.children) collect_global_decls(c, out);
}

void collect_local_imports(const Node& n, const ModuleInfo& mod, const std::string& self_name,
                           std::map<std::string, Binding>& out) {
  if (n.kind == NodeKind::Import || n.kind == NodeKind::ImportFrom) {
    collect_import(n, mod, self_name, out);
    return;
  }
  for (const Node& c : n.children) collect_local_imports(c, mod, self_name, out);
}

void find_calls(const Node& n, std::vector<const Node*>& out) {
  if (n.kind == NodeKind::Call) out.push_back(&n);
  for (const Node& c : n.children) find_calls(c, out);
}

std::string first_param(const Node& def) {
  for (const Node& p : def.children[1].children) {
    if (!p.has(python::kSlashParam) && !p.value.empty()) return p.value;
  }
  return {};
}

bool has_decorator(const Node& def, std::string_view name) {
  for (const Node& d : def.children[0].children) {
    if (d.kind == NodeKind::Name && d.value == name) return true;
  }
  return false;
}

void Resolver::resolve_unit(std::size_t unit, const Parsed& parsed, const python::UnitSlice& slice) {
  const ModuleInfo& mod = modules_.at(parsed.name);
  const bool is_class = slice.kind == UnitKind::Class;

  std::vector<const Node*> stmts;
  for (const Node* s : python::body_statements(slice)) {
    // Methods and nested classes of a class are units of their own.
    if (is_class && (s->kind == NodeKind::FunctionDef || s->kind == NodeKind::ClassDef)) continue;
    stmts.push_back(s);
  }

  std::set<std::string> locals;
  std::map<std::string, Binding> local_imports;
  if (!is_class) collect_locals(slice.node->children[1], locals, false);
  for (const Node* s : stmts) {
    if (!is_class) collect_locals(*s, locals, true);
    collect_local_imports(*s, mod, parsed.name, local_imports);
  }
  std::set<std::string> globals;
  for (const Node* s : stmts) collect_global_decls(*s, globals);
  for (const auto& g : globals) locals.erase(g);
  for (const auto& [name, b] : local_imports) locals.erase(name);

  // Receivers that denote the enclosing class.
  std::set<std::string> self_names;
  std::size_t enclosing = SIZE_MAX;
  if (slice.kind == UnitKind::Method) {
    enclosing = by_qualname_.at({parsed.name, unit_class_[unit]});
    if (!has_decorator(*slice.node, "staticmethod")) {
      const std::string first = first_param(*slice.node);
      if (!first.empty()) self_names.insert(first);
    }
  }

  std::vector<const Node*> calls;
  for (const Node* s : stmts) find_calls(*s, calls);
  std::set<std::string> reported;
  auto unresolved = [&](const Node& callee) {
    std::string text = dotted(callee);
    if (text.empty()) {
      text = std::string(parsed.module->text(callee.range));
    }
    if (reported.insert(text).second) unresolved_.emplace_back(repo_.units[unit].id, text);
  };

  for (const Node* call : calls) {
    const Node& callee = call->children.front();
    std::vector<std::size_t> targets;
    bool external = false;
    if (callee.kind == NodeKind::Attribute) {
      const Node& recv = callee.children.front();
      const std::string& method = callee.value;
      if (enclosing != SIZE_MAX && recv.kind == NodeKind::Name && self_names.count(recv.value)) {
        targets = lookup_method(enclosing, method);
      } else if (enclosing != SIZE_MAX && recv.kind == NodeKind::Call &&
                 recv.children.front().kind == NodeKind::Name && recv.children.front().value == "super") {
        if (auto b = class_bases_.find(enclosing); b != class_bases_.end()) {
          for (std::size_t base : b->second) {
            for (std::size_t m : lookup_method(base, method)) targets.push_back(m);
          }
        }
      } else {
        const Target base = resolve_expr(recv, mod, locals, local_imports);
        if (base.kind == Target::External) {
          external = true;
        } else if (base.kind == Target::Module) {
          const Target t = resolve_symbol(base.module, method, 1);
          if (t.kind == Target::Unit) targets = t.units;
          external = t.kind == Target::External;
        } else if (base.kind == Target::Unit && base.units.size() == 1 &&
                   repo_.units[base.units.front()].kind == UnitKind::Class) {
          targets = lookup_method(base.units.front(), method);
        }
      }
      if (targets.empty() && !external) {
        // Receiver of unknown type: only a repo-wide unique method name resolves.
        if (auto m = method_names_.find(method); m != method_names_.end() && m->second.size() == 1) {
          targets = m->second;
        }
      }
    } else if (callee.kind == NodeKind::Name) {
      const Target t = resolve_expr(callee, mod, locals, local_imports);
      if (t.kind == Target::Unit) targets = t.units;
    }
    if (targets.empty()) {
      unresolved(callee);
      continue;
    }
    for (std::size_t target : targets) edges_.emplace_back(unit, target);
  }
}

CallGraph Resolver::run() {
  std::map<std::string, std::size_t> file_index;
  for (const SourceFile& src : repo_.sources) {
    Parsed p;
    p.module = std::make_unique<python::ParsedModule>(src.text);
    p.slices = python::extract_units(*p.module);
    p.name = module_name_of(src.path);
    ModuleInfo info;
    info.path = src.path;
    info.is_package = src.path == "__init__.py" ||
                      (src.path.size() >= 12 && src.path.compare(src.path.size() - 12, 12, "/__init__.py") == 0);
    modules_[p.name] = std::move(info);
    file_index[src.path] = files_.size();
    files_.push_back(std::move(p));
  }

  unit_module_.resize(repo_.units.size());
  unit_class_.resize(repo_.units.size());
  for (std::size_t i = 0; i < repo_.units.size(); ++i) {
    const FunctionUnit& u = repo_.units[i];
    const std::string file(u.file());
    const std::string mod = module_name_of(file);
    const std::string qual(u.qualname());
    unit_module_[i] = mod;
    by_qualname_[{mod, qual}] = i;
    const auto dot = qual.rfind('.');
    if (dot == std::string::npos) {
      if (qual.find('#') == std::string::npos) {
        modules_[mod].top_units.emplace(qual, i);
        global_names_[qual].push_back(i);
      }
    } else {
      unit_class_[i] = qual.substr(0, dot);
      if (u.kind == UnitKind::Method) method_names_[std::string(u.name())].push_back(i);
    }
  }

  for (Parsed& p : files_) {
    ModuleInfo& mod = modules_.at(p.name);
    for (const Node& stmt : p.module->module().children) {
      collect_import(stmt, mod, p.name, mod.imports);
      if (stmt.kind == NodeKind::If || stmt.kind == NodeKind::Try) {
        // `try: import x except ImportError: ...` and TYPE_CHECKING guards
        std::map<std::string, Binding> nested;
        collect_local_imports(stmt, mod, p.name, nested);
        for (auto& [k, v] : nested) mod.imports.emplace(k, v);
      }
      if (stmt.kind == NodeKind::Assign || stmt.kind == NodeKind::AnnAssign ||
          stmt.kind == NodeKind::AugAssign) {
        std::set<std::string> names;
        collect_locals(stmt, names, true);
        for (const auto& n : names) {
          if (!mod.top_units.count(n)) mod.assigned.insert(n);
        }
      }
    }
  }

  index_classes();

  for (Parsed& p : files_) {
    const std::string& path = modules_.at(p.name).path;
    for (const python::UnitSlice& s : p.slices) {
      const auto it = by_qualname_.find({p.name, s.qualname});
      if (it == by_qualname_.end()) continue;
      if (repo_.units[it->second].file() != path) continue;
      resolve_unit(it->second, p, s);
    }
  }

  std::vector<std::string> nodes;
  nodes.reserve(repo_.units.size());
  for (const FunctionUnit& u : repo_.units) nodes.push_back(u.id);
  return CallGraph(std::move(nodes), std::move(edges_), std::move(unresolved_));
}

}  // namespace

CallGraph build_call_graph(const Repository& repo) { return Resolver(repo).run(); }

}  // namespace breakpoint
