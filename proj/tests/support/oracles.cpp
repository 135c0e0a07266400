#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace oracle {

using namespace microlearn;

std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(MICROLEARN_FIXTURE_DIR) / relative;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

std::multimap<std::string, std::string> prerequisites_of(const MindMap& map) {
  std::multimap<std::string, std::string> out;
  for (const auto& e : map.edges) out.emplace(e.target, e.prerequisite);
  return out;
}

}  // namespace

MindMap random_dag(Rng& rng, const RandomGraphShape& shape) {
  MindMap map;
  const auto n = 1 + rng.uniform_index(shape.max_concepts);
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  shuffle(rank, rng);  // rank[i]: hidden position of concept ci

  std::vector<std::size_t> declared(n);
  std::iota(declared.begin(), declared.end(), 0);
  shuffle(declared, rng);
  for (auto i : declared) {
    Concept c;
    c.id = "c" + std::to_string(i);
    c.title = "Concept " + std::to_string(i);
    c.kind = rng.bernoulli(0.3) ? ConceptKind::course_topic : ConceptKind::prerequisite;
    map.concepts.push_back(c);
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t p = 0; p < n; ++p) {
      if (rank[p] < rank[t] && rng.bernoulli(shape.edge_probability)) {
        map.edges.push_back({"c" + std::to_string(t), "c" + std::to_string(p), {}});
      }
    }
  }
  shuffle(map.edges, rng);
  const auto m = rng.uniform_index(shape.max_units + 1);
  for (std::size_t u = 0; u < m; ++u) {
    MicrolearningUnit unit;
    unit.id = "u" + std::to_string(u);
    unit.title = "Unit " + std::to_string(u);
    unit.minutes = static_cast<int>(1 + rng.uniform_index(15));
    unit.content_uri = "units/" + unit.id;
    const auto k = 1 + rng.uniform_index(std::min(shape.max_covers, static_cast<std::size_t>(n)));
    std::set<std::size_t> picked;
    while (picked.size() < k) picked.insert(static_cast<std::size_t>(rng.uniform_index(n)));
    std::vector<std::size_t> order(picked.begin(), picked.end());
    shuffle(order, rng);
    for (auto c : order) unit.covers.push_back("c" + std::to_string(c));
    map.units.push_back(unit);
  }
  return map;
}

std::optional<PrerequisiteEdge> inject_back_edge(MindMap& map, Rng& rng) {
  if (map.edges.empty()) return std::nullopt;
  const auto prereqs = prerequisites_of(map);
  // Walk down from a random edge's target to a random transitive prerequisite.
  const auto& start = map.edges[rng.uniform_index(map.edges.size())];
  std::string node = start.prerequisite;
  while (true) {
    auto [lo, hi] = prereqs.equal_range(node);
    const auto options = static_cast<std::size_t>(std::distance(lo, hi));
    if (options == 0 || rng.bernoulli(0.4)) break;
    std::advance(lo, static_cast<std::ptrdiff_t>(rng.uniform_index(options)));
    node = lo->second;
  }
  // node is reachable from start.target, so "node requires start.target" closes a cycle.
  PrerequisiteEdge back{node, start.target, {}};
  map.edges.insert(map.edges.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(map.edges.size() + 1)), back);
  return back;
}

bool is_genuine_cycle(const MindMap& map, const std::vector<std::string>& path) {
  if (path.size() < 3 || path.front() != path.back()) return false;
  const auto prereqs = prerequisites_of(map);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto [lo, hi] = prereqs.equal_range(path[i]);
    if (std::none_of(lo, hi, [&](const auto& kv) { return kv.second == path[i + 1]; })) return false;
  }
  return true;
}

bool has_cycle_dfs(const MindMap& map) {
  const auto prereqs = prerequisites_of(map);
  std::map<std::string, int> colour;  // 0 white, 1 grey, 2 black
  std::function<bool(const std::string&)> visit = [&](const std::string& node) {
    colour[node] = 1;
    auto [lo, hi] = prereqs.equal_range(node);
    for (auto it = lo; it != hi; ++it) {
      const int c = colour[it->second];
      if (c == 1) return true;
      if (c == 0 && visit(it->second)) return true;
    }
    colour[node] = 2;
    return false;
  };
  for (const auto& c : map.concepts) {
    if (colour[c.id] == 0 && visit(c.id)) return true;
  }
  return false;
}

bool is_topological(const MindMap& map, const std::vector<std::string>& order) {
  if (order.size() != map.concepts.size()) return false;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  if (pos.size() != order.size()) return false;
  for (const auto& c : map.concepts) {
    if (!pos.contains(c.id)) return false;
  }
  return std::all_of(map.edges.begin(), map.edges.end(),
                     [&](const PrerequisiteEdge& e) { return pos[e.prerequisite] < pos[e.target]; });
}

std::set<std::string> units_meeting(const MindMap& map, const std::vector<std::string>& concepts) {
  std::set<std::string> out;
  for (const auto& u : map.units) {
    for (const auto& c : u.covers) {
      if (std::find(concepts.begin(), concepts.end(), c) != concepts.end()) out.insert(u.id);
    }
  }
  return out;
}

std::set<std::string> closure_by_scan(const MindMap& map, const std::string& id) {
  std::set<std::string> out;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : map.edges) {
      if ((e.target == id || out.contains(e.target)) && !out.contains(e.prerequisite)) {
        out.insert(e.prerequisite);
        grew = true;
      }
    }
  }
  return out;
}

double pairwise_u(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  double u = 0;
  for (const auto& y : b) {
    for (const auto& x : a) u += y > x ? 1.0 : (y == x ? 0.5 : 0.0);
  }
  return u;
}

double enumerated_two_sided_p(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  std::vector<Rational> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto n = pooled.size();
  const double centre = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::abs(pairwise_u(a, b) - centre);
  std::uint64_t total = 0;
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != a.size()) continue;
    std::vector<Rational> ga, gb;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? ga : gb).push_back(pooled[i]);
    ++total;
    if (std::abs(pairwise_u(ga, gb) - centre) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

bool table_accepts(LearnerStage stage, ProgressEventKind kind) {
  using S = LearnerStage;
  using E = ProgressEventKind;
  static const std::set<std::pair<S, E>> legal = {
      {S::NotAssessed, E::InitialResult},
      {S::Remediating, E::UnitCompleted},
      {S::AwaitingFollowUp, E::FollowUpResult},
      {S::ClearedWithAdvice, E::GoalSatisfied},
      {S::ClearedWithAdvice, E::ReminderFired},
  };
  return legal.contains({stage, kind});
}

LearnerStage table_result_target(Classification band) {
  switch (band) {
    case Classification::Fail: return LearnerStage::Remediating;
    case Classification::PassWithRemediation: return LearnerStage::ClearedWithAdvice;
    case Classification::Pass: return LearnerStage::Cleared;
  }
  return LearnerStage::Cleared;
}

std::map<std::string, ChoiceSet> random_answers(const Quiz& quiz, double p_correct, Rng& rng) {
  std::map<std::string, ChoiceSet> out;
  for (const auto& q : quiz.questions) {
    if (rng.bernoulli(p_correct)) {
      out[q.id] = q.correct;
      continue;
    }
    std::size_t pick = rng.uniform_index(q.choices.size());
    if (ChoiceSet{pick} == q.correct) pick = (pick + 1) % q.choices.size();
    out[q.id] = {pick};
  }
  return out;
}

}  // namespace oracle
