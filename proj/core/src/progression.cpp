#include "microlearn/progression.hpp"

#include <algorithm>

namespace microlearn {

std::string_view to_string(LearnerStage stage) {
  switch (stage) {
    case LearnerStage::NotAssessed: return "NotAssessed";
    case LearnerStage::Remediating: return "Remediating";
    case LearnerStage::AwaitingFollowUp: return "AwaitingFollowUp";
    case LearnerStage::ClearedWithAdvice: return "ClearedWithAdvice";
    case LearnerStage::Cleared: return "Cleared";
  }
  return "NotAssessed";
}

std::string_view to_string(ProgressEventKind kind) {
  switch (kind) {
    case ProgressEventKind::InitialResult: return "InitialResult";
    case ProgressEventKind::UnitCompleted: return "UnitCompleted";
    case ProgressEventKind::FollowUpResult: return "FollowUpResult";
    case ProgressEventKind::GoalSatisfied: return "GoalSatisfied";
    case ProgressEventKind::ReminderFired: return "ReminderFired";
  }
  return "InitialResult";
}

LearnerStage stage_from_string(std::string_view text) {
  for (auto s : kAllStages) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown learner stage '" + std::string(text) + "'");
}

ProgressEventKind event_kind_from_string(std::string_view text) {
  for (auto k : kAllEventKinds) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown progress event '" + std::string(text) + "'");
}

IllegalTransition::IllegalTransition(LearnerStage from, ProgressEventKind on)
    : std::logic_error("event " + std::string(to_string(on)) + " is not allowed in state " +
                       std::string(to_string(from))),
      from_(from),
      on_(on) {}

bool accepts(LearnerStage stage, ProgressEventKind kind) {
  switch (stage) {
    case LearnerStage::NotAssessed: return kind == ProgressEventKind::InitialResult;
    case LearnerStage::Remediating: return kind == ProgressEventKind::UnitCompleted;
    case LearnerStage::AwaitingFollowUp: return kind == ProgressEventKind::FollowUpResult;
    case LearnerStage::ClearedWithAdvice:
      return kind == ProgressEventKind::GoalSatisfied || kind == ProgressEventKind::ReminderFired;
    case LearnerStage::Cleared: return false;
  }
  return false;
}

namespace {

std::string uncovered_reason(const Recommendation& rec) {
  std::string reason = "no microlearning unit covers";
  for (const auto& c : rec.triggering_concepts) reason += " " + c;
  return reason;
}

void enter_remediation(Transition& t, const GradeReport& report, RecommendationOrigin origin,
                       const ConceptGraph& graph, const ProgressionPolicy& policy) {
  auto rec = recommend(report, graph, origin, policy.depth);
  auto& s = t.state;
  s.completed_units.clear();
  s.open_goal.clear();
  if (rec.units.empty()) {
    s.assigned_units.clear();
    s.stage = LearnerStage::AwaitingFollowUp;
    s.needs_intervention = true;
    t.effects.emplace_back(FlagForIntervention{uncovered_reason(rec)});
  } else {
    s.assigned_units = rec.units;
    s.stage = LearnerStage::Remediating;
  }
  t.effects.emplace(t.effects.begin(), IssueRecommendation{std::move(rec), false});
}

void enter_advice(Transition& t, const GradeReport& report, const ConceptGraph& graph,
                  const ProgressionPolicy& policy) {
  auto rec = recommend(report, graph, RecommendationOrigin::followup_remediation, policy.depth);
  auto& s = t.state;
  s.stage = LearnerStage::ClearedWithAdvice;
  s.assigned_units.clear();
  s.completed_units.clear();
  const bool remind = !rec.units.empty();
  s.open_goal = remind ? rec.triggering_concepts : std::vector<std::string>{};
  t.effects.emplace_back(IssueRecommendation{std::move(rec), remind});
}

void enter_cleared(LearnerState& s) {
  s.stage = LearnerStage::Cleared;
  s.assigned_units.clear();
  s.completed_units.clear();
  s.open_goal.clear();
}

}  // namespace

Transition apply_event(const LearnerState& state, const ProgressEvent& event, const ConceptGraph& graph,
                       const ProgressionPolicy& policy) {
  if (!accepts(state.stage, event.kind())) throw IllegalTransition(state.stage, event.kind());

  Transition t{state, {}};
  auto& s = t.state;

  if (const auto* initial = std::get_if<InitialResult>(&event.payload)) {
    switch (initial->report.classification) {
      case Classification::Fail:
        enter_remediation(t, initial->report, RecommendationOrigin::initial_fail, graph, policy);
        break;
      case Classification::PassWithRemediation: enter_advice(t, initial->report, graph, policy); break;
      case Classification::Pass: enter_cleared(s); break;
    }
  } else if (const auto* done = std::get_if<UnitCompleted>(&event.payload)) {
    const auto& assigned = s.assigned_units;
    if (std::find(assigned.begin(), assigned.end(), done->unit_id) != assigned.end()) {
      s.completed_units.insert(done->unit_id);
    }
    const bool all_done = std::all_of(assigned.begin(), assigned.end(),
                                      [&](const std::string& u) { return s.completed_units.contains(u); });
    if (all_done) s.stage = LearnerStage::AwaitingFollowUp;
  } else if (const auto* follow_up = std::get_if<FollowUpResult>(&event.payload)) {
    ++s.attempt_count;
    switch (follow_up->report.classification) {
      case Classification::Fail: {
        enter_remediation(t, follow_up->report, RecommendationOrigin::followup_fail, graph, policy);
        if (s.attempt_count >= policy.max_attempts && !s.needs_intervention) {
          s.needs_intervention = true;
          t.effects.emplace_back(FlagForIntervention{"follow-up failed " + std::to_string(s.attempt_count) +
                                                     " times (limit " + std::to_string(policy.max_attempts) + ")"});
        }
        break;
      }
      case Classification::PassWithRemediation: enter_advice(t, follow_up->report, graph, policy); break;
      case Classification::Pass: enter_cleared(s); break;
    }
  } else if (std::holds_alternative<GoalSatisfied>(event.payload)) {
    enter_cleared(s);
    t.effects.emplace_back(SatisfyReminders{});
  } else if (const auto* fired = std::get_if<ReminderFired>(&event.payload)) {
    if (fired->last_active) {
      enter_cleared(s);
      s.goal_unmet = true;
    }
  }
  return t;
}

LearnerState replay(std::string_view learner, std::span<const ProgressEvent> events, const ConceptGraph& graph,
                    const ProgressionPolicy& policy) {
  LearnerState state;
  state.learner = std::string(learner);
  for (const auto& e : events) state = apply_event(state, e, graph, policy).state;
  return state;
}

}  // namespace microlearn
