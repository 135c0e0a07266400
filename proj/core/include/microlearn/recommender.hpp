#pragma once

// Wrong answers -> concepts -> covering units via the mind map, plus the
// periodic reminder schedule attached to a recommendation.

#include "microlearn/assessment.hpp"
#include "microlearn/knowledge_graph.hpp"
#include "microlearn/time.hpp"

#include <chrono>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace microlearn {

enum class RecommendationOrigin { initial_fail, followup_fail, followup_remediation };
enum class ClosureDepth { direct, with_prerequisites };

std::string_view to_string(RecommendationOrigin origin);
std::string_view to_string(ClosureDepth depth);
RecommendationOrigin origin_from_string(std::string_view text);  // throws std::invalid_argument
ClosureDepth depth_from_string(std::string_view text);           // throws std::invalid_argument

struct Recommendation {
  std::string id;  // assigned by the caller that persists it; empty when unsaved
  std::string learner;
  Timestamp generated_at{};
  std::vector<std::string> triggering_concepts;
  std::vector<std::string> units;
  RecommendationOrigin origin = RecommendationOrigin::initial_fail;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

/// One recommendation per evaluation: the wrong answers' concepts in report
/// order, deduplicated, optionally extended by each one's prerequisite
/// closure, mapped through ConceptGraph::units_for_concepts.
/// Throws GraphError when a wrong answer names a concept absent from the graph.
Recommendation recommend(const GradeReport& report, const ConceptGraph& graph, RecommendationOrigin origin,
                         ClosureDepth depth);

struct ReminderPolicy {
  std::chrono::seconds interval = std::chrono::hours(48);
  int cap = 10;
  friend bool operator==(const ReminderPolicy&, const ReminderPolicy&) = default;
};

enum class ReminderStatus { active, satisfied, expired };
std::string_view to_string(ReminderStatus status);
ReminderStatus reminder_status_from_string(std::string_view text);  // throws std::invalid_argument

struct Reminder {
  std::string learner;
  std::string recommendation_id;
  std::vector<std::string> concepts;
  std::vector<std::string> units;
  std::chrono::seconds interval{0};
  Timestamp next_fire{};
  int fired_count = 0;
  int cap = 1;
  ReminderStatus status = ReminderStatus::active;

  friend bool operator==(const Reminder&, const Reminder&) = default;
};

class NothingToRemind : public std::invalid_argument {
 public:
  NothingToRemind() : std::invalid_argument("nothing to remind: recommendation has no units") {}
};

/// Throws NothingToRemind for an empty recommendation and
/// std::invalid_argument for a non-positive interval or cap.
Reminder set_reminder(const Recommendation& rec, const ReminderPolicy& policy, Timestamp now);

struct ReminderFiring {
  std::string learner;
  std::string recommendation_id;
  Timestamp at{};
  int fired_count = 0;
  bool expired = false;

  friend bool operator==(const ReminderFiring&, const ReminderFiring&) = default;
};

/// Fires every active reminder with next_fire <= now, at most once per call:
/// fired_count increments, next_fire moves forward by whole intervals until it
/// is after `now` (missed periods coalesce), and the reminder expires when
/// fired_count reaches cap. A second call with the same `now` fires nothing.
std::vector<ReminderFiring> fire_due(std::span<Reminder> reminders, Timestamp now);

/// Marks the learner's active reminders satisfied; returns how many changed.
std::size_t satisfy_reminders(std::span<Reminder> reminders, std::string_view learner);

}  // namespace microlearn
