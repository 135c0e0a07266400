#include "microlearn/learning_service.hpp"

#include "microlearn/codec.hpp"

#include <algorithm>
#include <set>

namespace microlearn {

std::string_view to_string(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::bad_request: return "bad_request";
    case ServiceError::Code::forbidden: return "forbidden";
    case ServiceError::Code::not_found: return "not_found";
    case ServiceError::Code::conflict: return "conflict";
    case ServiceError::Code::storage: return "storage";
  }
  return "bad_request";
}

Catalog load_catalog(const DeploymentConfig& config) {
  Catalog c;
  c.graph = parse_mindmap(read_text_file(config.graph));
  c.graph_text = serialize(c.graph);
  c.progression = config.progression;
  c.reminders = config.reminders;
  c.thresholds = config.thresholds;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config.quiz_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Quiz quiz;
    try {
      quiz = quiz_from_json(read_json_file(file), config.thresholds);
    } catch (const CodecError& e) {
      throw CodecError(file.string() + ": " + e.what());
    }
    for (const auto& q : quiz.questions) {
      if (!c.graph.has_concept(q.concept_id)) {
        throw CodecError(file.string() + ": question " + q.id + " names unknown concept " + q.concept_id);
      }
    }
    const auto id = quiz.id;
    if (!c.quizzes.emplace(id, std::move(quiz)).second) {
      throw CodecError(file.string() + ": duplicate quiz id " + id);
    }
  }
  return c;
}

namespace {

struct SnapshotPolicy {
  ConceptGraph graph;
  ProgressionPolicy progression;
};

Json snapshot_payload(const Catalog& c) {
  Json p = Json::object();
  p["graph"] = c.graph_text;
  p["closure_depth"] = std::string(to_string(c.progression.depth));
  p["max_attempts"] = c.progression.max_attempts;
  p["reminder_interval_seconds"] = c.reminders.interval.count();
  p["reminder_cap"] = c.reminders.cap;
  p["thresholds"] = to_json(c.thresholds);
  Json ids = Json::array();
  for (const auto& [id, quiz] : c.quizzes) ids.push_back(id);
  p["quizzes"] = std::move(ids);
  return p;
}

SnapshotPolicy snapshot_from_payload(const Json& p) {
  SnapshotPolicy s;
  s.graph = parse_mindmap(p.at("graph").get<std::string>());
  s.progression.depth = depth_from_string(p.at("closure_depth").get<std::string>());
  s.progression.max_attempts = p.at("max_attempts").get<int>();
  return s;
}

Reminder* find_reminder(LearnerRecord& record, const std::string& rec_id) {
  for (auto& r : record.reminders) {
    if (r.recommendation_id == rec_id) return &r;
  }
  return nullptr;
}

/// Folds one logged record into a learner view. Shared by the live service and
/// replay_log so both produce the same views from the same records.
void fold(LearnerRecord& record, const EventRecord& r, const SnapshotPolicy* policy) {
  if (r.kind == event_kind::progress) {
    if (policy == nullptr) throw std::invalid_argument("progress record before any graph snapshot");
    const auto event = progress_event_from_json(r.payload);
    record.state = apply_event(record.state, event, policy->graph, policy->progression).state;
  } else if (r.kind == event_kind::submission) {
    record.reports.push_back(grade_report_from_json(r.payload.at("report")));
  } else if (r.kind == event_kind::recommendation) {
    record.recommendations.push_back(recommendation_from_json(r.payload));
  } else if (r.kind == event_kind::reminder_set) {
    record.reminders.push_back(reminder_from_json(r.payload));
  } else if (r.kind == event_kind::reminder_fired) {
    auto* reminder = find_reminder(record, r.payload.at("recommendation_id").get<std::string>());
    if (reminder == nullptr) throw std::invalid_argument("reminder_fired for an unknown reminder");
    reminder->fired_count = r.payload.at("fired_count").get<int>();
    reminder->next_fire = parse_timestamp(r.payload.at("next_fire").get<std::string>());
    if (r.payload.at("expired").get<bool>()) reminder->status = ReminderStatus::expired;
  } else if (r.kind == event_kind::reminder_satisfied) {
    satisfy_reminders(record.reminders, r.learner);
  }
}

}  // namespace

std::map<std::string, LearnerRecord> replay_log(std::span<const EventRecord> records) {
  std::map<std::string, LearnerRecord> out;
  std::optional<SnapshotPolicy> policy;
  for (const auto& r : records) {
    try {
      if (r.kind == event_kind::graph_snapshot) {
        policy = snapshot_from_payload(r.payload);
        continue;
      }
      if (r.learner.empty()) continue;
      auto [it, fresh] = out.try_emplace(r.learner);
      if (fresh) it->second.state.learner = r.learner;
      fold(it->second, r, policy ? &*policy : nullptr);
    } catch (const std::exception& e) {
      throw StorageError("event log record " + std::to_string(r.seq) + " cannot be replayed: " + e.what());
    }
  }
  return out;
}

LearningService::LearningService(DeploymentConfig config, Catalog catalog, std::unique_ptr<EventLog> log,
                                 Pseudonymizer pseudonyms, const Clock& clock)
    : config_(std::move(config)), clock_(clock), pseudonyms_(std::move(pseudonyms)), log_(std::move(log)) {
  for (auto& [learner, record] : replay_log(log_->snapshot())) {
    auto s = std::make_unique<Slot>();
    s->record = std::move(record);
    slots_.emplace(learner, std::move(s));
  }
  auto shared = std::make_shared<const Catalog>(std::move(catalog));
  commit({snapshot_record(*shared)});
  catalog_ = std::move(shared);
}

std::unique_ptr<LearningService> LearningService::open(const DeploymentConfig& config, const Clock& clock) {
  auto catalog = load_catalog(config);
  auto pseudonyms = Pseudonymizer::from_key_file(config.pseudonym_key_file);
  auto log = std::make_unique<EventLog>(config.log, config.durability);
  return std::make_unique<LearningService>(config, std::move(catalog), std::move(log), std::move(pseudonyms), clock);
}

std::string LearningService::pseudonym_for(std::string_view identity) const {
  if (identity.empty()) throw ServiceError(ServiceError::Code::bad_request, "empty learner identity");
  return pseudonyms_.pseudonym(identity);
}

std::shared_ptr<const Catalog> LearningService::catalog() const {
  std::shared_lock lock(catalog_mutex_);
  return catalog_;
}

void LearningService::check_pseudonym(const std::string& pseudonym) const {
  if (!is_pseudonym(pseudonym)) {
    throw ServiceError(ServiceError::Code::bad_request, "'" + pseudonym + "' is not a learner pseudonym");
  }
}

LearningService::Slot& LearningService::slot(const std::string& pseudonym) {
  {
    std::shared_lock lock(slots_mutex_);
    if (auto it = slots_.find(pseudonym); it != slots_.end()) return *it->second;
  }
  std::unique_lock lock(slots_mutex_);
  auto& s = slots_[pseudonym];
  if (!s) {
    s = std::make_unique<Slot>();
    s->record.state.learner = pseudonym;
  }
  return *s;
}

const LearningService::Slot* LearningService::find_slot(const std::string& pseudonym) const {
  std::shared_lock lock(slots_mutex_);
  auto it = slots_.find(pseudonym);
  return it == slots_.end() ? nullptr : it->second.get();
}

LearnerRecord LearningService::learner(const std::string& pseudonym) const {
  check_pseudonym(pseudonym);
  const auto* s = find_slot(pseudonym);
  if (s == nullptr) {
    LearnerRecord r;
    r.state.learner = pseudonym;
    return r;
  }
  std::lock_guard lock(s->mutex);
  return s->record;
}

std::vector<std::string> LearningService::learners() const {
  std::shared_lock lock(slots_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : slots_) out.push_back(id);
  return out;
}

EventRecord LearningService::make_record(const std::string& learner, std::string_view kind, Json payload) const {
  EventRecord r;
  r.at = clock_.now();
  r.learner = learner;
  r.kind = std::string(kind);
  r.payload = std::move(payload);
  return r;
}

EventRecord LearningService::snapshot_record(const Catalog& catalog) const {
  return make_record("", event_kind::graph_snapshot, snapshot_payload(catalog));
}

void LearningService::commit(std::vector<EventRecord> records) {
  try {
    log_->append_batch(std::move(records));
  } catch (const StorageError& e) {
    throw ServiceError(ServiceError::Code::storage, e.what());
  }
}

std::vector<EventRecord> LearningService::advance(const Catalog& catalog, LearnerRecord& record,
                                                  const ProgressEvent& event, std::optional<Recommendation>* issued,
                                                  std::optional<Reminder>* reminder) const {
  Transition t;
  try {
    t = apply_event(record.state, event, catalog.graph, catalog.progression);
  } catch (const IllegalTransition& e) {
    throw ServiceError(ServiceError::Code::conflict, e.what());
  } catch (const GraphError& e) {
    throw ServiceError(ServiceError::Code::conflict, e.what());
  }
  const auto& learner = record.state.learner;
  std::vector<EventRecord> out;
  out.push_back(make_record(learner, event_kind::progress, to_json(event)));
  auto next_rec = record.recommendations.size() + 1;
  for (auto& effect : t.effects) {
    if (auto* issue = std::get_if<IssueRecommendation>(&effect)) {
      auto rec = std::move(issue->recommendation);
      rec.id = "rec-" + std::to_string(next_rec++);
      rec.generated_at = event.at;
      out.push_back(make_record(learner, event_kind::recommendation, to_json(rec)));
      if (issue->schedule_reminder) {
        auto r = set_reminder(rec, catalog.reminders, event.at);
        out.push_back(make_record(learner, event_kind::reminder_set, to_json(r)));
        if (reminder) *reminder = std::move(r);
      }
      if (issued) *issued = std::move(rec);
    } else if (std::holds_alternative<SatisfyReminders>(effect)) {
      out.push_back(make_record(learner, event_kind::reminder_satisfied, Json::object()));
    } else if (const auto* flag = std::get_if<FlagForIntervention>(&effect)) {
      Json p = Json::object();
      p["reason"] = flag->reason;
      out.push_back(make_record(learner, event_kind::intervention, std::move(p)));
    }
  }
  return out;
}

namespace {

SnapshotPolicy policy_of(const Catalog& c) { return SnapshotPolicy{c.graph, c.progression}; }

void fold_all(LearnerRecord& record, const std::vector<EventRecord>& records, const Catalog& catalog) {
  const auto policy = policy_of(catalog);
  for (const auto& r : records) fold(record, r, &policy);
}

bool covers_goal(const Quiz& quiz, const std::vector<std::string>& goal) {
  std::set<std::string> concepts;
  for (const auto& q : quiz.questions) concepts.insert(q.concept_id);
  return !goal.empty() &&
         std::all_of(goal.begin(), goal.end(), [&](const std::string& c) { return concepts.contains(c); });
}

}  // namespace

SubmitResult LearningService::submit(const std::string& pseudonym, const std::string& quiz_id,
                                     const std::map<std::string, ChoiceSet>& answers) {
  check_pseudonym(pseudonym);
  std::shared_lock catalog_lock(catalog_mutex_);
  const auto& catalog = *catalog_;
  const auto qit = catalog.quizzes.find(quiz_id);
  if (qit == catalog.quizzes.end()) throw ServiceError(ServiceError::Code::not_found, "unknown quiz '" + quiz_id + "'");
  const auto& quiz = qit->second;

  auto& s = slot(pseudonym);
  std::lock_guard lock(s.mutex);
  const auto now = clock_.now();
  Submission sub{pseudonym, quiz_id, answers, now};
  SubmitResult result;
  try {
    result.report = grade(quiz, sub);
  } catch (const AssessmentError& e) {
    throw ServiceError(ServiceError::Code::bad_request, e.what());
  }
  result.report.graded_at = now;

  const auto stage = s.record.state.stage;
  std::optional<ProgressEvent> event;
  switch (quiz.kind) {
    case QuizKind::initial:
      if (stage != LearnerStage::NotAssessed) {
        throw ServiceError(ServiceError::Code::conflict, "initial evaluation already taken (state " +
                                                             std::string(to_string(stage)) + ")");
      }
      event = ProgressEvent{now, InitialResult{result.report}};
      break;
    case QuizKind::follow_up:
      if (stage != LearnerStage::AwaitingFollowUp) {
        throw ServiceError(ServiceError::Code::conflict,
                           "follow-up evaluation not expected in state " + std::string(to_string(stage)));
      }
      event = ProgressEvent{now, FollowUpResult{result.report}};
      break;
    case QuizKind::micro_test:
      if (stage == LearnerStage::ClearedWithAdvice && result.report.classification == Classification::Pass &&
          covers_goal(quiz, s.record.state.open_goal)) {
        event = ProgressEvent{now, GoalSatisfied{"micro_test:" + quiz_id}};
        result.goal_satisfied = true;
      }
      break;
  }

  Json payload = Json::object();
  payload["quiz_id"] = quiz_id;
  Json jans = Json::object();
  for (const auto& [q, chosen] : answers) jans[q] = std::vector<std::size_t>(chosen.begin(), chosen.end());
  payload["answers"] = std::move(jans);
  payload["report"] = to_json(result.report);
  std::vector<EventRecord> records;
  records.push_back(make_record(pseudonym, event_kind::submission, std::move(payload)));
  if (event) {
    auto more = advance(catalog, s.record, *event, &result.recommendation, &result.reminder);
    records.insert(records.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  commit(records);
  fold_all(s.record, records, catalog);
  result.state = s.record.state;
  return result;
}

LearnerState LearningService::complete_unit(const std::string& pseudonym, const std::string& unit_id) {
  check_pseudonym(pseudonym);
  std::shared_lock catalog_lock(catalog_mutex_);
  const auto& catalog = *catalog_;
  if (catalog.graph.find_unit(unit_id) == nullptr) {
    throw ServiceError(ServiceError::Code::not_found, "unknown unit '" + unit_id + "'");
  }
  auto& s = slot(pseudonym);
  std::lock_guard lock(s.mutex);
  const auto& assigned = s.record.state.assigned_units;
  if (std::find(assigned.begin(), assigned.end(), unit_id) == assigned.end()) {
    throw ServiceError(ServiceError::Code::conflict, "unit '" + unit_id + "' is not assigned to this learner");
  }
  auto records = advance(catalog, s.record, ProgressEvent{clock_.now(), UnitCompleted{unit_id}});
  commit(records);
  fold_all(s.record, records, catalog);
  return s.record.state;
}

LearnerState LearningService::acknowledge_goal(const std::string& pseudonym) {
  check_pseudonym(pseudonym);
  std::shared_lock catalog_lock(catalog_mutex_);
  const auto& catalog = *catalog_;
  auto& s = slot(pseudonym);
  std::lock_guard lock(s.mutex);
  auto records = advance(catalog, s.record, ProgressEvent{clock_.now(), GoalSatisfied{"acknowledged"}});
  commit(records);
  fold_all(s.record, records, catalog);
  return s.record.state;
}

void LearningService::feedback(const std::string& pseudonym, const std::string& unit_id, int rating,
                               std::optional<FeedbackTag> tag) {
  check_pseudonym(pseudonym);
  const auto cat = catalog();
  if (cat->graph.find_unit(unit_id) == nullptr) {
    throw ServiceError(ServiceError::Code::not_found, "unknown unit '" + unit_id + "'");
  }
  EventRecord r;
  try {
    r = feedback_record(FeedbackEntry{pseudonym, unit_id, rating, tag, clock_.now()});
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ServiceError::Code::bad_request, e.what());
  }
  commit({std::move(r)});
}

std::vector<ReminderFiring> LearningService::fire_due_reminders() {
  std::shared_lock catalog_lock(catalog_mutex_);
  const auto& catalog = *catalog_;
  std::vector<Slot*> all;
  {
    std::shared_lock lock(slots_mutex_);
    for (auto& [id, s] : slots_) all.push_back(s.get());
  }
  std::vector<ReminderFiring> fired;
  for (auto* s : all) {
    std::lock_guard lock(s->mutex);
    auto reminders = s->record.reminders;
    const auto now = clock_.now();
    const auto firings = fire_due(reminders, now);
    if (firings.empty()) continue;
    std::vector<EventRecord> records;
    LearnerRecord preview = s->record;
    for (const auto& f : firings) {
      const auto* after = find_reminder(preview, f.recommendation_id);
      const auto idx = static_cast<std::size_t>(after - preview.reminders.data());
      Json p = Json::object();
      p["recommendation_id"] = f.recommendation_id;
      p["fired_count"] = f.fired_count;
      p["next_fire"] = format_timestamp(reminders[idx].next_fire);
      p["expired"] = f.expired;
      std::vector<EventRecord> batch{make_record(f.learner, event_kind::reminder_fired, std::move(p))};
      fold_all(preview, batch, catalog);
      const bool last_active =
          f.expired && std::none_of(preview.reminders.begin(), preview.reminders.end(),
                                    [](const Reminder& r) { return r.status == ReminderStatus::active; });
      if (accepts(preview.state.stage, ProgressEventKind::ReminderFired)) {
        auto more = advance(catalog, preview, ProgressEvent{now, ReminderFired{f.recommendation_id, last_active}});
        fold_all(preview, more, catalog);
        batch.insert(batch.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      }
      records.insert(records.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
    commit(records);
    fold_all(s->record, records, catalog);
    fired.insert(fired.end(), firings.begin(), firings.end());
  }
  return fired;
}

std::vector<DemandEntry> LearningService::demand(const TimeWindow& window) const {
  const auto records = log_->snapshot();
  return demand_report(records, window);
}

std::vector<QualityEntry> LearningService::quality() const {
  const auto records = log_->snapshot();
  return quality_report(records);
}

stats::CohortComparison LearningService::cohort(std::span<const Rational> a, std::span<const Rational> b) const {
  try {
    return stats::cohort_compare(a, b);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ServiceError::Code::bad_request, e.what());
  }
}

void LearningService::reload() {
  Catalog fresh;
  try {
    fresh = load_catalog(config_);
  } catch (const std::exception& e) {
    throw ServiceError(ServiceError::Code::bad_request, std::string("reload rejected: ") + e.what());
  }
  auto shared = std::make_shared<const Catalog>(std::move(fresh));
  std::unique_lock lock(catalog_mutex_);
  commit({snapshot_record(*shared)});
  catalog_ = std::move(shared);
}

std::string LearningService::export_log() const { return log_->export_text(); }

}  // namespace microlearn
