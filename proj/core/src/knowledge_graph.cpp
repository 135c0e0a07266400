#include "microlearn/knowledge_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_set>

namespace microlearn {

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::prerequisite: return "prerequisite";
    case ConceptKind::course_topic: return "course_topic";
  }
  return "prerequisite";
}

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::video: return "video";
    case UnitKind::project: return "project";
    case UnitKind::presentation: return "presentation";
    case UnitKind::text: return "text";
    case UnitKind::quizlet: return "quizlet";
  }
  return "video";
}

std::optional<ConceptKind> concept_kind_from_string(std::string_view text) {
  if (text == "prerequisite") return ConceptKind::prerequisite;
  if (text == "course_topic") return ConceptKind::course_topic;
  return std::nullopt;
}

std::optional<UnitKind> unit_kind_from_string(std::string_view text) {
  for (auto kind : {UnitKind::video, UnitKind::project, UnitKind::presentation, UnitKind::text, UnitKind::quizlet}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(FindingCode code) {
  switch (code) {
    case FindingCode::syntax: return "syntax";
    case FindingCode::invalid_id: return "invalid-id";
    case FindingCode::duplicate_id: return "duplicate-id";
    case FindingCode::duplicate_edge: return "duplicate-edge";
    case FindingCode::dangling_reference: return "unknown-reference";
    case FindingCode::self_loop: return "self-loop";
    case FindingCode::cycle: return "cycle";
    case FindingCode::unit_too_long: return "unit-duration";
    case FindingCode::uncovered_concept: return "uncovered-concept";
    case FindingCode::unreachable_concept: return "unreachable-concept";
  }
  return "unknown";
}

bool is_valid_token(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

GraphError::GraphError(Finding finding)
    : std::runtime_error(format_finding(finding)), finding_(std::move(finding)) {}

std::string format_finding(const Finding& finding, std::string_view source_name) {
  std::ostringstream out;
  if (!source_name.empty()) out << source_name << ':';
  if (finding.where.line > 0) {
    out << finding.where.line << ':' << finding.where.column << ':';
  }
  if (out.tellp() > 0) out << ' ';
  out << (finding.severity == Severity::error ? "error" : "warning") << ": " << finding.message;
  return out.str();
}

namespace {

Finding error(FindingCode code, std::string message, SourceLocation where) {
  return Finding{Severity::error, code, std::move(message), where, {}};
}

Finding warning(FindingCode code, std::string message, SourceLocation where) {
  return Finding{Severity::warning, code, std::move(message), where, {}};
}

std::string join_path(const std::vector<std::string>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " -> ";
    out += path[i];
  }
  return out;
}

// Strongly connected components, iterative Tarjan. Components are returned in
// the order their roots finish.
std::vector<std::vector<std::size_t>> strongly_connected(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr auto unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_child;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& frame = call.back();
      const std::size_t v = frame.node;
      if (frame.next_child < adj[v].size()) {
        const std::size_t w = adj[v][frame.next_child++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> component;
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != v);
        components.push_back(std::move(component));
      }
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
    }
  }
  return components;
}

// Shortest closed walk through `start` inside the component.
std::vector<std::size_t> cycle_through(std::size_t start, const std::vector<std::vector<std::size_t>>& adj,
                                       const std::vector<bool>& in_component) {
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(adj.size(), none);
  std::deque<std::size_t> queue{start};
  std::vector<bool> seen(adj.size(), false);
  seen[start] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : adj[v]) {
      if (!in_component[w]) continue;
      if (w == start) {
        std::vector<std::size_t> path{start};
        for (std::size_t u = v; u != start; u = parent[u]) path.push_back(u);
        std::reverse(path.begin() + 1, path.end());
        path.push_back(start);
        return path;
      }
      if (!seen[w]) {
        seen[w] = true;
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  return {};
}

}  // namespace

std::vector<Finding> validate(const MindMap& map) {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  std::unordered_map<std::string, std::size_t> concept_index;
  for (const auto& c : map.concepts) {
    if (!is_valid_token(c.id)) {
      errors.push_back(error(FindingCode::invalid_id, "invalid concept id '" + c.id + "' (allowed: [a-z0-9_-]+)", c.where));
      continue;
    }
    if (!concept_index.emplace(c.id, concept_index.size()).second) {
      errors.push_back(error(FindingCode::duplicate_id, "duplicate concept id '" + c.id + "'", c.where));
    }
  }
  // Indices into map.concepts for the first declaration of each id.
  std::vector<std::size_t> first_decl;
  {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < map.concepts.size(); ++i) {
      if (is_valid_token(map.concepts[i].id) && seen.insert(map.concepts[i].id).second) first_decl.push_back(i);
    }
  }
  const std::size_t n = concept_index.size();

  std::unordered_set<std::string> unit_ids;
  for (const auto& u : map.units) {
    if (!is_valid_token(u.id)) {
      errors.push_back(error(FindingCode::invalid_id, "invalid unit id '" + u.id + "' (allowed: [a-z0-9_-]+)", u.where));
    } else if (!unit_ids.insert(u.id).second) {
      errors.push_back(error(FindingCode::duplicate_id, "duplicate unit id '" + u.id + "'", u.where));
    }
    if (u.minutes < 1 || u.minutes > kMaxUnitMinutes) {
      errors.push_back(error(FindingCode::unit_too_long,
                             "unit '" + u.id + "' lasts " + std::to_string(u.minutes) + " minutes (allowed 1.." +
                                 std::to_string(kMaxUnitMinutes) + ")",
                             u.where));
    }
    if (u.covers.empty()) {
      errors.push_back(error(FindingCode::syntax, "unit '" + u.id + "' covers no concepts", u.where));
    }
    if (u.version < 1) {
      errors.push_back(error(FindingCode::syntax, "unit '" + u.id + "' has non-positive version", u.where));
    }
    for (const auto& covered : u.covers) {
      if (!concept_index.contains(covered)) {
        errors.push_back(error(FindingCode::dangling_reference,
                               "unit '" + u.id + "' covers unknown concept '" + covered + "'", u.where));
      }
    }
  }

  std::vector<std::vector<std::size_t>> adj(n);
  std::set<std::pair<std::size_t, std::size_t>> seen_edges;
  for (const auto& e : map.edges) {
    const auto t = concept_index.find(e.target);
    const auto p = concept_index.find(e.prerequisite);
    if (t == concept_index.end()) {
      errors.push_back(error(FindingCode::dangling_reference, "edge references unknown concept '" + e.target + "'", e.where));
    }
    if (p == concept_index.end()) {
      errors.push_back(
          error(FindingCode::dangling_reference, "edge references unknown concept '" + e.prerequisite + "'", e.where));
    }
    if (t == concept_index.end() || p == concept_index.end()) continue;
    if (t->second == p->second) {
      auto f = error(FindingCode::self_loop, "concept '" + e.target + "' requires itself", e.where);
      f.path = {e.target, e.target};
      errors.push_back(std::move(f));
      continue;
    }
    if (!seen_edges.emplace(t->second, p->second).second) {
      errors.push_back(error(FindingCode::duplicate_edge,
                             "duplicate edge " + e.target + " <- " + e.prerequisite, e.where));
      continue;
    }
    adj[t->second].push_back(p->second);
  }

  // Id by compact index, and the location of each concept for cycle reports.
  std::vector<std::string> ids(n);
  for (const auto& [id, idx] : concept_index) ids[idx] = id;

  auto components = strongly_connected(adj);
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> cycles;
  std::vector<bool> in_component(n, false);
  for (auto& component : components) {
    if (component.size() < 2) continue;
    const std::size_t start = *std::min_element(component.begin(), component.end());
    for (auto v : component) in_component[v] = true;
    cycles.emplace_back(start, cycle_through(start, adj, in_component));
    for (auto v : component) in_component[v] = false;
  }
  std::sort(cycles.begin(), cycles.end());
  for (const auto& [start, path] : cycles) {
    Finding f = error(FindingCode::cycle, "", map.concepts[first_decl[start]].where);
    for (auto v : path) f.path.push_back(ids[v]);
    f.message = "prerequisite cycle: " + join_path(f.path);
    errors.push_back(std::move(f));
  }

  // Warnings.
  std::vector<bool> covered(n, false);
  for (const auto& u : map.units) {
    for (const auto& c : u.covers) {
      if (auto it = concept_index.find(c); it != concept_index.end()) covered[it->second] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!covered[i]) {
      warnings.push_back(warning(FindingCode::uncovered_concept, "no unit covers " + ids[i],
                                 map.concepts[first_decl[i]].where));
    }
  }

  // Reachability is only meaningful once the map names what is being taught.
  std::vector<bool> reachable(n, false);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i) {
    if (map.concepts[first_decl[i]].kind == ConceptKind::course_topic) {
      reachable[i] = true;
      pending.push_back(i);
    }
  }
  if (!pending.empty()) {
    while (!pending.empty()) {
      const auto v = pending.back();
      pending.pop_back();
      for (auto w : adj[v]) {
        if (!reachable[w]) {
          reachable[w] = true;
          pending.push_back(w);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!reachable[i]) {
        warnings.push_back(warning(FindingCode::unreachable_concept,
                                   "concept " + ids[i] + " is not a prerequisite of any course topic",
                                   map.concepts[first_decl[i]].where));
      }
    }
  }

  errors.insert(errors.end(), std::make_move_iterator(warnings.begin()), std::make_move_iterator(warnings.end()));
  return errors;
}

ConceptGraph ConceptGraph::build(MindMap map) {
  for (auto& finding : validate(map)) {
    if (finding.severity == Severity::error) throw GraphError(std::move(finding));
  }

  ConceptGraph g;
  g.map_ = std::move(map);
  const std::size_t n = g.map_.concepts.size();
  for (std::size_t i = 0; i < n; ++i) g.concept_index_.emplace(g.map_.concepts[i].id, i);
  for (std::size_t i = 0; i < g.map_.units.size(); ++i) g.unit_index_.emplace(g.map_.units[i].id, i);

  g.prerequisites_.assign(n, {});
  std::vector<std::vector<std::size_t>> dependents(n);
  std::vector<std::size_t> in_degree(n, 0);
  for (const auto& e : g.map_.edges) {
    const auto t = g.concept_index_.at(e.target);
    const auto p = g.concept_index_.at(e.prerequisite);
    g.prerequisites_[t].push_back(p);
    dependents[p].push_back(t);
    ++in_degree[t];
  }

  g.units_covering_.assign(n, {});
  for (std::size_t u = 0; u < g.map_.units.size(); ++u) {
    for (const auto& c : g.map_.units[u].covers) {
      auto& list = g.units_covering_[g.concept_index_.at(c)];
      if (list.empty() || list.back() != u) list.push_back(u);
    }
  }

  // Kahn's algorithm; the smallest declaration index among ready concepts goes first.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_degree[i] == 0) ready.push(i);
  }
  g.topo_rank_.assign(n, 0);
  while (!ready.empty()) {
    const auto v = ready.top();
    ready.pop();
    g.topo_rank_[v] = g.topo_order_.size();
    g.topo_order_.push_back(g.map_.concepts[v].id);
    for (auto w : dependents[v]) {
      if (--in_degree[w] == 0) ready.push(w);
    }
  }
  return g;
}

std::size_t ConceptGraph::index_of(std::string_view id) const {
  auto it = concept_index_.find(std::string(id));
  if (it == concept_index_.end()) {
    throw GraphError(error(FindingCode::dangling_reference, "unknown concept '" + std::string(id) + "'", {}));
  }
  return it->second;
}

bool ConceptGraph::has_concept(std::string_view id) const {
  return concept_index_.contains(std::string(id));
}

const Concept& ConceptGraph::concept_at(std::string_view id) const {
  return map_.concepts[index_of(id)];
}

const MicrolearningUnit* ConceptGraph::find_unit(std::string_view id) const {
  auto it = unit_index_.find(std::string(id));
  return it == unit_index_.end() ? nullptr : &map_.units[it->second];
}

std::size_t ConceptGraph::topological_rank(std::string_view id) const {
  return topo_rank_[index_of(id)];
}

std::vector<std::string> ConceptGraph::prerequisite_closure(std::string_view id) const {
  const auto root = index_of(id);
  std::vector<bool> seen(map_.concepts.size(), false);
  std::vector<std::size_t> pending{root};
  std::vector<std::size_t> found;
  while (!pending.empty()) {
    const auto v = pending.back();
    pending.pop_back();
    for (auto p : prerequisites_[v]) {
      if (!seen[p]) {
        seen[p] = true;
        found.push_back(p);
        pending.push_back(p);
      }
    }
  }
  std::sort(found.begin(), found.end(), [&](auto a, auto b) { return topo_rank_[a] < topo_rank_[b]; });
  std::vector<std::string> out;
  out.reserve(found.size());
  for (auto v : found) out.push_back(map_.concepts[v].id);
  return out;
}

std::vector<std::string> ConceptGraph::units_for_concepts(std::span<const std::string> concepts) const {
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best_rank(map_.units.size(), none);
  for (const auto& id : concepts) {
    const auto c = index_of(id);
    for (auto u : units_covering_[c]) best_rank[u] = std::min(best_rank[u], topo_rank_[c]);
  }
  std::vector<std::size_t> picked;
  for (std::size_t u = 0; u < map_.units.size(); ++u) {
    if (best_rank[u] != none) picked.push_back(u);
  }
  std::stable_sort(picked.begin(), picked.end(), [&](auto a, auto b) { return best_rank[a] < best_rank[b]; });
  std::vector<std::string> out;
  out.reserve(picked.size());
  for (auto u : picked) out.push_back(map_.units[u].id);
  return out;
}

std::vector<Finding> validate(const ConceptGraph& graph) {
  return validate(graph.declarations());
}

namespace {

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string serialize(const MindMap& map) {
  std::ostringstream out;
  for (const auto& c : map.concepts) {
    out << "concept " << c.id << ' ' << quote(c.title) << " kind=" << to_string(c.kind);
    if (!c.description.empty()) out << " description=" << quote(c.description);
    out << '\n';
  }
  for (const auto& e : map.edges) {
    out << "requires " << e.target << " <- " << e.prerequisite << '\n';
  }
  for (const auto& u : map.units) {
    out << "unit " << u.id << ' ' << quote(u.title) << " covers ";
    for (std::size_t i = 0; i < u.covers.size(); ++i) out << (i ? "," : "") << u.covers[i];
    out << " kind=" << to_string(u.kind) << " minutes=" << u.minutes << " uri=" << quote(u.content_uri);
    if (u.version != 1) out << " version=" << u.version;
    out << '\n';
  }
  return out.str();
}

std::string serialize(const ConceptGraph& graph) {
  return serialize(graph.declarations());
}

}  // namespace microlearn
