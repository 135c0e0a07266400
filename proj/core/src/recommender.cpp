#include "microlearn/recommender.hpp"

#include <algorithm>
#include <unordered_set>

namespace microlearn {

std::string_view to_string(RecommendationOrigin origin) {
  switch (origin) {
    case RecommendationOrigin::initial_fail: return "initial_fail";
    case RecommendationOrigin::followup_fail: return "followup_fail";
    case RecommendationOrigin::followup_remediation: return "followup_remediation";
  }
  return "initial_fail";
}

std::string_view to_string(ClosureDepth depth) {
  return depth == ClosureDepth::direct ? "direct" : "with_prerequisites";
}

RecommendationOrigin origin_from_string(std::string_view text) {
  for (auto o : {RecommendationOrigin::initial_fail, RecommendationOrigin::followup_fail,
                 RecommendationOrigin::followup_remediation}) {
    if (text == to_string(o)) return o;
  }
  throw std::invalid_argument("unknown recommendation origin '" + std::string(text) + "'");
}

ClosureDepth depth_from_string(std::string_view text) {
  if (text == "direct") return ClosureDepth::direct;
  if (text == "with_prerequisites") return ClosureDepth::with_prerequisites;
  throw std::invalid_argument("closure depth must be direct or with_prerequisites, got '" + std::string(text) + "'");
}

std::string_view to_string(ReminderStatus status) {
  switch (status) {
    case ReminderStatus::active: return "active";
    case ReminderStatus::satisfied: return "satisfied";
    case ReminderStatus::expired: return "expired";
  }
  return "active";
}

ReminderStatus reminder_status_from_string(std::string_view text) {
  for (auto s : {ReminderStatus::active, ReminderStatus::satisfied, ReminderStatus::expired}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown reminder status '" + std::string(text) + "'");
}

Recommendation recommend(const GradeReport& report, const ConceptGraph& graph, RecommendationOrigin origin,
                         ClosureDepth depth) {
  Recommendation rec;
  rec.learner = report.learner;
  rec.generated_at = report.graded_at;
  rec.origin = origin;

  std::unordered_set<std::string> seen;
  for (const auto& wrong : report.wrong_answers) {
    if (!graph.has_concept(wrong.concept_id)) {
      throw GraphError(Finding{Severity::error, FindingCode::dangling_reference,
                               "question '" + wrong.question_id + "' is tagged with concept '" + wrong.concept_id +
                                   "', which the mind map does not declare",
                               {},
                               {}});
    }
    if (seen.insert(wrong.concept_id).second) rec.triggering_concepts.push_back(wrong.concept_id);
  }
  if (depth == ClosureDepth::with_prerequisites) {
    const auto direct = rec.triggering_concepts;
    for (const auto& id : direct) {
      for (auto& prereq : graph.prerequisite_closure(id)) {
        if (seen.insert(prereq).second) rec.triggering_concepts.push_back(std::move(prereq));
      }
    }
  }
  rec.units = graph.units_for_concepts(rec.triggering_concepts);
  return rec;
}

Reminder set_reminder(const Recommendation& rec, const ReminderPolicy& policy, Timestamp now) {
  if (rec.units.empty()) throw NothingToRemind();
  if (policy.interval <= std::chrono::seconds(0)) throw std::invalid_argument("reminder interval must be positive");
  if (policy.cap < 1) throw std::invalid_argument("reminder cap must be positive");
  Reminder r;
  r.learner = rec.learner;
  r.recommendation_id = rec.id;
  r.concepts = rec.triggering_concepts;
  r.units = rec.units;
  r.interval = policy.interval;
  r.next_fire = now + policy.interval;
  r.fired_count = 0;
  r.cap = policy.cap;
  r.status = ReminderStatus::active;
  return r;
}

std::vector<ReminderFiring> fire_due(std::span<Reminder> reminders, Timestamp now) {
  std::vector<ReminderFiring> fired;
  for (auto& r : reminders) {
    if (r.status != ReminderStatus::active || r.next_fire > now) continue;
    ++r.fired_count;
    const auto behind = (now - r.next_fire) / r.interval;
    r.next_fire += r.interval * (behind + 1);
    if (r.fired_count >= r.cap) r.status = ReminderStatus::expired;
    fired.push_back(ReminderFiring{r.learner, r.recommendation_id, now, r.fired_count,
                                   r.status == ReminderStatus::expired});
  }
  return fired;
}

std::size_t satisfy_reminders(std::span<Reminder> reminders, std::string_view learner) {
  std::size_t changed = 0;
  for (auto& r : reminders) {
    if (r.learner == learner && r.status == ReminderStatus::active) {
      r.status = ReminderStatus::satisfied;
      ++changed;
    }
  }
  return changed;
}

}  // namespace microlearn
