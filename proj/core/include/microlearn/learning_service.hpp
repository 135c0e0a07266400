#pragma once

// Composition root: catalog (graph + quizzes), per-learner progression, the
// event log, reminders and reports. Every mutation is written to the log as
// one batch before the in-memory view changes, and the in-memory view is by
// construction what replay_log() rebuilds from that log.

#include "microlearn/analytics.hpp"
#include "microlearn/assessment.hpp"
#include "microlearn/config.hpp"
#include "microlearn/event_log.hpp"
#include "microlearn/knowledge_graph.hpp"
#include "microlearn/progression.hpp"
#include "microlearn/pseudonym.hpp"
#include "microlearn/recommender.hpp"
#include "microlearn/statistics.hpp"
#include "microlearn/time.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace microlearn {

class ServiceError : public std::runtime_error {
 public:
  enum class Code { bad_request, forbidden, not_found, conflict, storage };
  ServiceError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(ServiceError::Code code);

/// Immutable once published; reload swaps in a new one.
struct Catalog {
  ConceptGraph graph;
  std::string graph_text;  // canonical serialization, as logged
  std::map<std::string, Quiz> quizzes;
  ProgressionPolicy progression;
  ReminderPolicy reminders;
  Thresholds thresholds = kDefaultThresholds;
};

/// Reads the graph and every quiz in the quiz directory. Throws GraphError or
/// CodecError.
Catalog load_catalog(const DeploymentConfig& config);

/// Everything the service serves about one learner.
struct LearnerRecord {
  LearnerState state;
  std::vector<Recommendation> recommendations;
  std::vector<Reminder> reminders;
  std::vector<GradeReport> reports;

  friend bool operator==(const LearnerRecord&, const LearnerRecord&) = default;
};

/// Learner views rebuilt from the log alone: graph_snapshot records supply the
/// graph and policy in force for the progress records that follow them.
/// Throws StorageError when the log is inconsistent.
std::map<std::string, LearnerRecord> replay_log(std::span<const EventRecord> records);

struct SubmitResult {
  GradeReport report;
  LearnerState state;
  std::optional<Recommendation> recommendation;
  std::optional<Reminder> reminder;
  bool goal_satisfied = false;
};

class LearningService {
 public:
  /// Takes ownership of an already opened log and rebuilds learner views from it.
  LearningService(DeploymentConfig config, Catalog catalog, std::unique_ptr<EventLog> log, Pseudonymizer pseudonyms,
                  const Clock& clock);

  /// Loads the catalog, key and log named by the config. Fails fast.
  static std::unique_ptr<LearningService> open(const DeploymentConfig& config, const Clock& clock);

  std::string pseudonym_for(std::string_view identity) const;

  std::shared_ptr<const Catalog> catalog() const;

  /// Unknown learners are NotAssessed with no history.
  LearnerRecord learner(const std::string& pseudonym) const;
  std::vector<std::string> learners() const;

  /// Grades and advances the learner. initial quizzes are accepted only in
  /// NotAssessed, follow_up quizzes only in AwaitingFollowUp (else conflict).
  /// A micro_test graded Pass that covers a ClearedWithAdvice learner's open
  /// goal satisfies it; other micro_tests are recorded without a transition.
  SubmitResult submit(const std::string& pseudonym, const std::string& quiz_id,
                      const std::map<std::string, ChoiceSet>& answers);

  LearnerState complete_unit(const std::string& pseudonym, const std::string& unit_id);
  LearnerState acknowledge_goal(const std::string& pseudonym);
  void feedback(const std::string& pseudonym, const std::string& unit_id, int rating, std::optional<FeedbackTag> tag);

  /// Fires reminders due at the clock's now.
  std::vector<ReminderFiring> fire_due_reminders();

  std::vector<DemandEntry> demand(const TimeWindow& window) const;
  std::vector<QualityEntry> quality() const;
  stats::CohortComparison cohort(std::span<const Rational> a, std::span<const Rational> b) const;

  /// Re-reads graph and quizzes; on failure the old catalog stays in place.
  void reload();

  std::string export_log() const;
  const EventLog& log() const noexcept { return *log_; }
  const DeploymentConfig& config() const noexcept { return config_; }

 private:
  struct Slot {
    mutable std::mutex mutex;
    LearnerRecord record;
  };

  Slot& slot(const std::string& pseudonym);
  const Slot* find_slot(const std::string& pseudonym) const;
  void check_pseudonym(const std::string& pseudonym) const;
  void commit(std::vector<EventRecord> records);
  EventRecord snapshot_record(const Catalog& catalog) const;
  EventRecord make_record(const std::string& learner, std::string_view kind, Json payload) const;

  /// Applies one progress event for a locked slot, returning the log records
  /// that describe it (progress record first) and the updated record.
  std::vector<EventRecord> advance(const Catalog& catalog, LearnerRecord& record, const ProgressEvent& event,
                                   std::optional<Recommendation>* issued = nullptr,
                                   std::optional<Reminder>* reminder = nullptr) const;

  DeploymentConfig config_;
  const Clock& clock_;
  Pseudonymizer pseudonyms_;
  std::unique_ptr<EventLog> log_;

  mutable std::shared_mutex catalog_mutex_;
  std::shared_ptr<const Catalog> catalog_;

  mutable std::shared_mutex slots_mutex_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
};

}  // namespace microlearn
