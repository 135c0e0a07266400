#pragma once

// Per-learner workflow: initial evaluation, the unit/follow-up remediation
// loop, advice with reminders, and clearance. apply_event is pure; effects
// tell the caller what to persist or schedule.

#include "microlearn/assessment.hpp"
#include "microlearn/knowledge_graph.hpp"
#include "microlearn/recommender.hpp"

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace microlearn {

enum class LearnerStage { NotAssessed, Remediating, AwaitingFollowUp, ClearedWithAdvice, Cleared };

enum class ProgressEventKind { InitialResult, UnitCompleted, FollowUpResult, GoalSatisfied, ReminderFired };

inline constexpr LearnerStage kAllStages[] = {LearnerStage::NotAssessed, LearnerStage::Remediating,
                                              LearnerStage::AwaitingFollowUp, LearnerStage::ClearedWithAdvice,
                                              LearnerStage::Cleared};
inline constexpr ProgressEventKind kAllEventKinds[] = {
    ProgressEventKind::InitialResult, ProgressEventKind::UnitCompleted, ProgressEventKind::FollowUpResult,
    ProgressEventKind::GoalSatisfied, ProgressEventKind::ReminderFired};

std::string_view to_string(LearnerStage stage);
std::string_view to_string(ProgressEventKind kind);
LearnerStage stage_from_string(std::string_view text);            // throws std::invalid_argument
ProgressEventKind event_kind_from_string(std::string_view text);  // throws std::invalid_argument

struct LearnerState {
  std::string learner;
  LearnerStage stage = LearnerStage::NotAssessed;
  std::vector<std::string> assigned_units;
  std::set<std::string> completed_units;
  int attempt_count = 0;  // follow-up submissions so far
  std::vector<std::string> open_goal;
  bool needs_intervention = false;
  bool goal_unmet = false;  // advice reminders ran out before the goal was met

  friend bool operator==(const LearnerState&, const LearnerState&) = default;
};

struct InitialResult {
  GradeReport report;
};
struct UnitCompleted {
  std::string unit_id;
};
struct FollowUpResult {
  GradeReport report;
};
struct GoalSatisfied {
  std::string evidence;  // "micro_test:<quiz id>" or "acknowledged"
};
struct ReminderFired {
  std::string recommendation_id;
  bool last_active = false;  // this firing expired the learner's final active reminder
};

struct ProgressEvent {
  Timestamp at{};
  std::variant<InitialResult, UnitCompleted, FollowUpResult, GoalSatisfied, ReminderFired> payload;

  ProgressEventKind kind() const { return static_cast<ProgressEventKind>(payload.index()); }
};

struct IssueRecommendation {
  Recommendation recommendation;
  bool schedule_reminder = false;
};
struct SatisfyReminders {};
struct FlagForIntervention {
  std::string reason;
};

using Effect = std::variant<IssueRecommendation, SatisfyReminders, FlagForIntervention>;

struct Transition {
  LearnerState state;
  std::vector<Effect> effects;
};

struct ProgressionPolicy {
  ClosureDepth depth = ClosureDepth::direct;
  int max_attempts = 5;
  friend bool operator==(const ProgressionPolicy&, const ProgressionPolicy&) = default;
};

class IllegalTransition : public std::logic_error {
 public:
  IllegalTransition(LearnerStage from, ProgressEventKind on);
  LearnerStage from() const noexcept { return from_; }
  ProgressEventKind on() const noexcept { return on_; }

 private:
  LearnerStage from_;
  ProgressEventKind on_;
};

/// The legal (stage, event kind) pairs; everything else is rejected.
bool accepts(LearnerStage stage, ProgressEventKind kind);

/// Throws IllegalTransition (state unchanged) for pairs outside the table,
/// and GraphError when a report references concepts missing from `graph`.
///
///   NotAssessed       InitialResult   Fail -> Remediating (units assigned)
///                                     PassWithRemediation -> ClearedWithAdvice
///                                     Pass -> Cleared
///   Remediating       UnitCompleted   -> AwaitingFollowUp once every assigned
///                                     unit is complete, else stays
///   AwaitingFollowUp  FollowUpResult  Fail -> Remediating (units reassigned)
///                                     PassWithRemediation -> ClearedWithAdvice
///                                     Pass -> Cleared
///   ClearedWithAdvice GoalSatisfied   -> Cleared
///   ClearedWithAdvice ReminderFired   -> ClearedWithAdvice, or Cleared with
///                                     goal_unmet when the last reminder expires
///
/// A Fail whose wrong answers no unit covers has nothing to study: the learner
/// goes to AwaitingFollowUp and is flagged for intervention.
Transition apply_event(const LearnerState& state, const ProgressEvent& event, const ConceptGraph& graph,
                       const ProgressionPolicy& policy);

/// Folds `events` from NotAssessed.
LearnerState replay(std::string_view learner, std::span<const ProgressEvent> events, const ConceptGraph& graph,
                    const ProgressionPolicy& policy);

}  // namespace microlearn
