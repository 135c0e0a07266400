#pragma once

// Prerequisite mind map: concepts, "target requires prerequisite" edges, and
// the microlearning units that cover concepts. A ConceptGraph is immutable and
// always acyclic; MindMap is the unchecked declaration list it is built from.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace microlearn {

enum class ConceptKind { prerequisite, course_topic };
enum class UnitKind { video, project, presentation, text, quizlet };

inline constexpr int kMaxUnitMinutes = 15;

std::string_view to_string(ConceptKind kind);
std::string_view to_string(UnitKind kind);
std::optional<ConceptKind> concept_kind_from_string(std::string_view text);
std::optional<UnitKind> unit_kind_from_string(std::string_view text);

/// True for non-empty strings over [a-z0-9_-].
bool is_valid_token(std::string_view id);

/// 1-based; line 0 means "not from a document".
struct SourceLocation {
  int line = 0;
  int column = 0;
};

struct Concept {
  std::string id;
  std::string title;
  ConceptKind kind = ConceptKind::prerequisite;
  std::string description;
  SourceLocation where{};

  friend bool operator==(const Concept& a, const Concept& b) {
    return a.id == b.id && a.title == b.title && a.kind == b.kind && a.description == b.description;
  }
};

/// `prerequisite` must be mastered before `target`.
struct PrerequisiteEdge {
  std::string target;
  std::string prerequisite;
  SourceLocation where{};

  friend bool operator==(const PrerequisiteEdge& a, const PrerequisiteEdge& b) {
    return a.target == b.target && a.prerequisite == b.prerequisite;
  }
};

struct MicrolearningUnit {
  std::string id;
  std::string title;
  std::vector<std::string> covers;
  UnitKind kind = UnitKind::video;
  int minutes = 1;
  std::string content_uri;
  int version = 1;
  SourceLocation where{};

  friend bool operator==(const MicrolearningUnit& a, const MicrolearningUnit& b) {
    return a.id == b.id && a.title == b.title && a.covers == b.covers && a.kind == b.kind &&
           a.minutes == b.minutes && a.content_uri == b.content_uri && a.version == b.version;
  }
};

/// Declarations in document order, not yet checked for references or cycles.
struct MindMap {
  std::vector<Concept> concepts;
  std::vector<PrerequisiteEdge> edges;
  std::vector<MicrolearningUnit> units;

  friend bool operator==(const MindMap&, const MindMap&) = default;
};

enum class Severity { error, warning };

enum class FindingCode {
  syntax,
  invalid_id,
  duplicate_id,
  duplicate_edge,
  dangling_reference,
  self_loop,
  cycle,
  unit_too_long,
  uncovered_concept,
  unreachable_concept,
};

std::string_view to_string(FindingCode code);

struct Finding {
  Severity severity = Severity::error;
  FindingCode code = FindingCode::syntax;
  std::string message;
  SourceLocation where{};
  /// For cycle findings: closed id path following target -> prerequisite
  /// (first id repeated at the end).
  std::vector<std::string> path;
};

/// Raised by the parser and by ConceptGraph::build.
class GraphError : public std::runtime_error {
 public:
  explicit GraphError(Finding finding);
  const Finding& finding() const noexcept { return finding_; }
  FindingCode code() const noexcept { return finding_.code; }
  SourceLocation where() const noexcept { return finding_.where; }

 private:
  Finding finding_;
};

/// Errors (cycles, dangling references, duplicates, over-long units) and
/// warnings (uncovered or unreachable concepts). Errors come first. Each
/// strongly connected component with a cycle yields exactly one cycle finding.
std::vector<Finding> validate(const MindMap& map);

class ConceptGraph {
 public:
  ConceptGraph() = default;

  /// Throws GraphError with the first error finding of validate(map).
  static ConceptGraph build(MindMap map);

  const std::vector<Concept>& concepts() const noexcept { return map_.concepts; }
  const std::vector<PrerequisiteEdge>& edges() const noexcept { return map_.edges; }
  const std::vector<MicrolearningUnit>& units() const noexcept { return map_.units; }
  const MindMap& declarations() const noexcept { return map_; }

  bool has_concept(std::string_view id) const;
  const Concept& concept_at(std::string_view id) const;  // throws GraphError
  const MicrolearningUnit* find_unit(std::string_view id) const;

  /// Concept ids, prerequisites before dependents, ties by declaration order.
  const std::vector<std::string>& topological_order() const noexcept { return topo_order_; }
  std::size_t topological_rank(std::string_view id) const;

  /// Direct and transitive prerequisites of `id` in topological order; never
  /// contains `id` itself.
  std::vector<std::string> prerequisite_closure(std::string_view id) const;

  /// Units whose covers-set meets `concepts`, ordered by the smallest
  /// topological rank among the matched concepts, then declaration order.
  std::vector<std::string> units_for_concepts(std::span<const std::string> concepts) const;

  friend bool operator==(const ConceptGraph& a, const ConceptGraph& b) { return a.map_ == b.map_; }

 private:
  std::size_t index_of(std::string_view id) const;

  MindMap map_;
  std::unordered_map<std::string, std::size_t> concept_index_;
  std::unordered_map<std::string, std::size_t> unit_index_;
  std::vector<std::vector<std::size_t>> prerequisites_;  // by concept index
  std::vector<std::vector<std::size_t>> units_covering_;  // by concept index
  std::vector<std::string> topo_order_;
  std::vector<std::size_t> topo_rank_;  // by concept index
};

/// Warnings only; a built graph cannot carry errors.
std::vector<Finding> validate(const ConceptGraph& graph);

/// Parses the line-oriented mind-map language into declarations. Only syntax
/// and field-level problems are reported here (GraphError with line/column).
MindMap parse_declarations(std::string_view text);

/// parse_declarations followed by ConceptGraph::build.
ConceptGraph parse_mindmap(std::string_view text);

/// Canonical text: concepts, then edges, then units, each in declaration
/// order, one statement per line with normalized spacing.
std::string serialize(const MindMap& map);
std::string serialize(const ConceptGraph& graph);

/// "file:line:col: error: message" style rendering.
std::string format_finding(const Finding& finding, std::string_view source_name = {});

}  // namespace microlearn
