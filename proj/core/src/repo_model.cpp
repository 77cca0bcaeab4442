#include "breakpoint/repo_model.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>

#include "breakpoint/digest.hpp"
#include "breakpoint/error.hpp"

namespace fs = std::filesystem;

namespace breakpoint {

std::string_view FunctionUnit::file() const {
  const std::size_t sep = std::string_view(id).find("::");
  return std::string_view(id).substr(0, sep);
}

std::string_view FunctionUnit::qualname() const {
  const std::size_t sep = std::string_view(id).find("::");
  return std::string_view(id).substr(sep + 2);
}

std::string_view FunctionUnit::name() const {
  std::string_view q = qualname();
  const std::size_t hash = q.find('#');
  if (hash != std::string_view::npos) q = q.substr(0, hash);
  const std::size_t dot = q.rfind('.');
  return dot == std::string_view::npos ? q : q.substr(dot + 1);
}

std::string make_unit_id(std::string_view file, std::string_view qualname) {
  std::string id(file);
  id += "::";
  id += qualname;
  return id;
}

std::pair<std::string, std::string> split_unit_id(std::string_view id) {
  const std::size_t sep = id.find("::");
  if (sep == std::string_view::npos || sep == 0 || sep + 2 >= id.size()) {
    throw Error(Errc::UnknownUnit, "malformed unit id '" + std::string(id) + "'");
  }
  return {std::string(id.substr(0, sep)), std::string(id.substr(sep + 2))};
}

const FunctionUnit* Repository::find(std::string_view id) const {
  for (const FunctionUnit& u : units) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

const FunctionUnit& Repository::at(std::string_view id) const {
  if (const FunctionUnit* u = find(id)) return *u;
  throw Error(Errc::UnknownUnit, std::string(id));
}

bool is_test_path(std::string_view path) {
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    const bool last = slash == std::string_view::npos;
    if (last) slash = path.size();
    const std::string_view part = path.substr(start, slash - start);
    if (!last && (part == "tests" || part == "test")) return true;
    if (last) {
      if (part.substr(0, 5) == "test_" || part == "conftest.py") return true;
      if (part.size() > 8 && part.substr(part.size() - 8) == "_test.py") return true;
    }
    start = slash + 1;
    if (last) break;
  }
  return false;
}

namespace {

bool skip_directory(const std::string& name) {
  return (!name.empty() && name.front() == '.') || name == "__pycache__" || name == "venv" ||
         name == "node_modules" || name == "build" || name == "dist" || name == "site-packages";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string detect_commit(const fs::path& root) {
  if (!fs::exists(root / ".git")) return "unversioned";
  const std::string cmd = "git -C '" + root.string() + "' rev-parse HEAD 2>/dev/null";
  std::unique_ptr<FILE, decltype(&pclose)> pipe(popen(cmd.c_str(), "r"), &pclose);
  if (!pipe) return "unversioned";
  std::array<char, 128> buf{};
  std::string out;
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe.get()) != nullptr) out += buf.data();
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out.size() == 40 ? out : "unversioned";
}

}  // namespace

std::vector<std::string> list_python_files(const fs::path& root) {
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    const std::string name = it->path().filename().string();
    if (it->is_directory()) {
      if (skip_directory(name)) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".py") {
      files.push_back(fs::relative(it->path(), root).generic_string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string module_name_of(std::string_view path) {
  std::string m(path);
  if (m.size() >= 3 && m.compare(m.size() - 3, 3, ".py") == 0) m.resize(m.size() - 3);
  std::replace(m.begin(), m.end(), '/', '.');
  const std::string init = "__init__";
  if (m == init) return "";
  if (m.size() > init.size() + 1 && m.compare(m.size() - init.size() - 1, init.size() + 1, "." + init) == 0) {
    m.resize(m.size() - init.size() - 1);
  }
  return m;
}

std::vector<FunctionUnit> units_of_source(std::string_view path, const std::string& source) {
  python::ParsedModule parsed(source);
  std::vector<FunctionUnit> units;
  for (const python::UnitSlice& slice : python::extract_units(parsed)) {
    FunctionUnit u;
    u.id = make_unit_id(path, slice.qualname);
    u.kind = slice.kind;
    u.signature = source.substr(slice.begin, slice.signature_end - slice.begin);
    u.docstring = source.substr(slice.signature_end, slice.docstring_end - slice.signature_end);
    u.body = source.substr(slice.docstring_end, slice.end - slice.docstring_end);
    u.span = {slice.start_line, slice.end_line};
    units.push_back(std::move(u));
  }
  return units;
}

Repository ingest_repository(const fs::path& root, std::string test_command,
                             const IngestOptions& options) {
  if (!fs::is_directory(root)) throw Error(Errc::PathNotFound, root.string());
  Repository repo;
  repo.root = fs::absolute(root).lexically_normal();
  repo.test_command = std::move(test_command);
  repo.commit = detect_commit(repo.root);

  nlohmann::json failures = nlohmann::json::array();
  for (const std::string& rel : list_python_files(repo.root)) {
    if (!options.include_tests && is_test_path(rel)) continue;
    std::string text = read_file(repo.root / rel);
    try {
      auto units = units_of_source(rel, text);
      for (auto& u : units) repo.units.push_back(std::move(u));
      repo.sources.push_back({rel, std::move(text)});
    } catch (const SyntaxError& e) {
      failures.push_back({{"file", rel}, {"error", e.what()}});
    }
  }
  repo.metadata["parse_failures"] = std::move(failures);
  if (repo.units.empty()) throw Error(Errc::NoUnitsFound, repo.root.string());
  return repo;
}

// ---- CallGraph ---------------------------------------------------------------

CallGraph::CallGraph(std::vector<std::string> nodes,
                     std::vector<std::pair<std::size_t, std::size_t>> edges,
                     std::vector<std::pair<std::string, std::string>> unresolved)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), unresolved_(std::move(unresolved)) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (const auto& [from, to] : edges_) {
    if (from >= nodes_.size() || to >= nodes_.size()) {
      throw Error(Errc::UnknownNode, "edge endpoint out of range");
    }
    out_[from].push_back(to);
    in_[to].push_back(from);
  }
}

CallGraph CallGraph::from_edges(std::size_t count,
                                std::vector<std::pair<std::size_t, std::size_t>> edges) {
  std::vector<std::string> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) nodes.push_back("n" + std::to_string(i));
  return CallGraph(std::move(nodes), std::move(edges));
}

std::optional<std::size_t> CallGraph::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] == id) return i;
  }
  return std::nullopt;
}

std::size_t CallGraph::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw Error(Errc::UnknownNode, std::string(id));
}

bool CallGraph::has_edge(std::string_view from, std::string_view to) const {
  const auto a = find(from);
  const auto b = find(to);
  if (!a || !b) return false;
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(*a, *b));
}

std::optional<std::size_t> chain_distance(const CallGraph& g, std::size_t a, std::size_t b) {
  if (a >= g.size() || b >= g.size()) throw Error(Errc::UnknownNode, "node index out of range");
  if (a == b) return 0;
  std::vector<std::size_t> dist(g.size(), SIZE_MAX);
  std::deque<std::size_t> queue{a};
  dist[a] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    auto visit = [&](std::size_t w) {
      if (dist[w] != SIZE_MAX) return false;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
      return w == b;
    };
    for (std::size_t w : g.successors(v)) {
      if (visit(w)) return dist[w];
    }
    for (std::size_t w : g.predecessors(v)) {
      if (visit(w)) return dist[w];
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> chain_distance(const CallGraph& g, std::string_view a, std::string_view b) {
  return chain_distance(g, g.index_of(a), g.index_of(b));
}

nlohmann::json snapshot_json(const Repository& repo, const CallGraph& graph) {
  nlohmann::json units = nlohmann::json::array();
  for (const FunctionUnit& u : repo.units) {
    units.push_back({{"id", u.id},
                     {"kind", to_string(u.kind)},
                     {"span", {u.span.start, u.span.end}},
                     {"signature_digest", content_digest(u.signature)},
                     {"docstring_digest", content_digest(u.docstring)},
                     {"body_digest", content_digest(u.body)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [from, to] : graph.edges()) {
    edges.push_back({graph.nodes()[from], graph.nodes()[to]});
  }
  nlohmann::json unresolved = nlohmann::json::array();
  for (const auto& [caller, name] : graph.unresolved()) unresolved.push_back({caller, name});
  return {{"schema_version", 1},
          {"root", repo.root.generic_string()},
          {"commit", repo.commit},
          {"test_command", repo.test_command},
          {"metadata", repo.metadata},
          {"units", std::move(units)},
          {"edges", std::move(edges)},
          {"unresolved", std::move(unresolved)}};
}

CallGraph call_graph_from_snapshot(const nlohmann::json& snapshot) {
  if (snapshot.value("schema_version", 0) != 1) {
    throw Error(Errc::SchemaError, "unsupported snapshot schema_version");
  }
  std::vector<std::string> nodes;
  for (const auto& u : snapshot.at("units")) nodes.push_back(u.at("id").get<std::string>());
  std::vector<std::string> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  auto index = [&](const std::string& id) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    if (it == sorted.end() || *it != id) throw Error(Errc::SchemaError, "edge to unknown unit " + id);
    return static_cast<std::size_t>(it - sorted.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : snapshot.at("edges")) {
    edges.emplace_back(index(e.at(0).get<std::string>()), index(e.at(1).get<std::string>()));
  }
  std::vector<std::pair<std::string, std::string>> unresolved;
  for (const auto& r : snapshot.value("unresolved", nlohmann::json::array())) {
    unresolved.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::string>());
  }
  return CallGraph(std::move(sorted), std::move(edges), std::move(unresolved));
}

}  // namespace breakpoint
