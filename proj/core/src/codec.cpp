#include "microlearn/codec.hpp"

#include <fstream>
#include <sstream>

namespace microlearn {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw CodecError(where.empty() ? what : where + ": " + what);
}

const Json& require_object(const Json& value, const std::string& where) {
  if (!value.is_object()) bad(where, "expected an object");
  return value;
}

const Json& field(const Json& object, const char* key, const std::string& where) {
  require_object(object, where);
  auto it = object.find(key);
  if (it == object.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

const Json* optional_field(const Json& object, const char* key) {
  auto it = object.find(key);
  return it == object.end() || it->is_null() ? nullptr : &*it;
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

std::string string_field(const Json& object, const char* key, const std::string& where) {
  const auto& v = field(object, key, where);
  if (!v.is_string()) bad(path_of(where, key), "expected a string");
  return v.get<std::string>();
}

std::int64_t integer_field(const Json& object, const char* key, const std::string& where) {
  const auto& v = field(object, key, where);
  if (!v.is_number_integer()) bad(path_of(where, key), "expected an integer");
  return v.get<std::int64_t>();
}

bool bool_field(const Json& object, const char* key, const std::string& where) {
  const auto& v = field(object, key, where);
  if (!v.is_boolean()) bad(path_of(where, key), "expected true or false");
  return v.get<bool>();
}

std::vector<std::string> string_list(const Json& value, const std::string& where) {
  if (!value.is_array()) bad(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_string()) bad(where + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(value[i].get<std::string>());
  }
  return out;
}

std::vector<std::string> string_list_field(const Json& object, const char* key, const std::string& where) {
  return string_list(field(object, key, where), path_of(where, key));
}

Timestamp timestamp_field(const Json& object, const char* key, const std::string& where) {
  const auto text = string_field(object, key, where);
  try {
    return parse_timestamp(text);
  } catch (const std::invalid_argument& e) {
    bad(path_of(where, key), e.what());
  }
}

ChoiceSet choice_set(const Json& value, const std::string& where) {
  ChoiceSet out;
  auto add = [&](const Json& v, const std::string& at) {
    if (!v.is_number_unsigned()) bad(at, "expected a non-negative choice index");
    out.insert(v.get<std::size_t>());
  };
  if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) add(value[i], where + "[" + std::to_string(i) + "]");
  } else {
    add(value, where);
  }
  return out;
}

Json choice_set_to_json(const ChoiceSet& set) {
  Json out = Json::array();
  for (auto c : set) out.push_back(c);
  return out;
}

template <typename Enum>
Enum enum_field(const Json& object, const char* key, const std::string& where, Enum (*from)(std::string_view)) {
  const auto text = string_field(object, key, where);
  try {
    return from(text);
  } catch (const std::invalid_argument& e) {
    bad(path_of(where, key), e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw CodecError(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Rational rational_from_json(const Json& value, const std::string& where) {
  try {
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_number_float()) return parse_rational(value.dump());
    if (value.is_string()) return parse_rational(value.get<std::string>());
  } catch (const std::exception& e) {
    bad(where, e.what());
  }
  bad(where, "expected a number or a rational string such as \"3/4\"");
}

Json rational_to_json(const Rational& value) {
  return to_string(value);
}

Json to_json(const Thresholds& thresholds) {
  Json out = Json::object();
  out["min"] = rational_to_json(thresholds.min);
  out["max"] = rational_to_json(thresholds.max);
  return out;
}

Thresholds thresholds_from_json(const Json& value) {
  Thresholds t;
  t.min = rational_from_json(field(value, "min", "thresholds"), "thresholds.min");
  t.max = rational_from_json(field(value, "max", "thresholds"), "thresholds.max");
  if (!t.valid()) bad("thresholds", "must satisfy 0 <= min < max <= 1");
  return t;
}

Json to_json(const Quiz& quiz, bool include_answer_key) {
  Json out = Json::object();
  out["id"] = quiz.id;
  out["kind"] = std::string(to_string(quiz.kind));
  out["thresholds"] = to_json(quiz.thresholds);
  Json questions = Json::array();
  for (const auto& q : quiz.questions) {
    Json jq = Json::object();
    jq["id"] = q.id;
    jq["concept"] = q.concept_id;
    jq["stem"] = q.stem;
    jq["choices"] = q.choices;
    if (include_answer_key) jq["correct"] = choice_set_to_json(q.correct);
    jq["multiple"] = q.correct.size() > 1;
    jq["weight"] = rational_to_json(q.weight);
    questions.push_back(std::move(jq));
  }
  out["questions"] = std::move(questions);
  return out;
}

Quiz quiz_from_json(const Json& value, const Thresholds& fallback) {
  require_object(value, "quiz");
  Quiz quiz;
  quiz.id = string_field(value, "id", "");
  quiz.kind = enum_field(value, "kind", "", &quiz_kind_from_string);
  quiz.thresholds = optional_field(value, "thresholds") ? thresholds_from_json(value.at("thresholds")) : fallback;
  const auto& questions = field(value, "questions", "");
  if (!questions.is_array()) bad("questions", "expected an array");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const std::string where = "questions[" + std::to_string(i) + "]";
    const auto& jq = questions[i];
    Question q;
    q.id = string_field(jq, "id", where);
    q.concept_id = string_field(jq, "concept", where);
    q.stem = string_field(jq, "stem", where);
    q.choices = string_list_field(jq, "choices", where);
    q.correct = choice_set(field(jq, "correct", where), where + ".correct");
    if (const auto* w = optional_field(jq, "weight")) q.weight = rational_from_json(*w, where + ".weight");
    quiz.questions.push_back(std::move(q));
  }
  try {
    validate_quiz(quiz);
  } catch (const AssessmentError& e) {
    throw CodecError(e.what());
  }
  return quiz;
}

std::map<std::string, ChoiceSet> answers_from_json(const Json& value) {
  if (!value.is_object()) bad("answers", "expected an object of question id -> choice indices");
  std::map<std::string, ChoiceSet> out;
  for (auto it = value.begin(); it != value.end(); ++it) {
    out.emplace(it.key(), choice_set(it.value(), "answers." + it.key()));
  }
  return out;
}

Json to_json(const Submission& submission) {
  Json out = Json::object();
  out["learner"] = submission.learner;
  out["quiz_id"] = submission.quiz_id;
  out["submitted_at"] = format_timestamp(submission.submitted_at);
  Json answers = Json::object();
  for (const auto& [q, chosen] : submission.answers) answers[q] = choice_set_to_json(chosen);
  out["answers"] = std::move(answers);
  return out;
}

Submission submission_from_json(const Json& value) {
  require_object(value, "submission");
  Submission s;
  s.learner = string_field(value, "learner", "");
  s.quiz_id = string_field(value, "quiz_id", "");
  if (optional_field(value, "submitted_at")) s.submitted_at = timestamp_field(value, "submitted_at", "");
  s.answers = answers_from_json(field(value, "answers", ""));
  return s;
}

Json to_json(const GradeReport& report) {
  Json out = Json::object();
  out["quiz_id"] = report.quiz_id;
  out["quiz_kind"] = std::string(to_string(report.quiz_kind));
  out["learner"] = report.learner;
  out["graded_at"] = format_timestamp(report.graded_at);
  out["score"] = to_double(report.score);
  out["score_exact"] = rational_to_json(report.score);
  out["classification"] = std::string(to_string(report.classification));
  out["thresholds"] = to_json(report.thresholds);
  Json categories = Json::array();
  for (const auto& c : report.per_category) {
    Json jc = Json::object();
    jc["concept"] = c.concept_id;
    jc["weight"] = rational_to_json(c.weight);
    jc["earned"] = rational_to_json(c.earned);
    jc["subscore"] = to_double(c.subscore());
    categories.push_back(std::move(jc));
  }
  out["per_category"] = std::move(categories);
  Json wrong = Json::array();
  for (const auto& w : report.wrong_answers) {
    Json jw = Json::object();
    jw["question"] = w.question_id;
    jw["concept"] = w.concept_id;
    wrong.push_back(std::move(jw));
  }
  out["wrong_answers"] = std::move(wrong);
  return out;
}

GradeReport grade_report_from_json(const Json& value) {
  require_object(value, "report");
  GradeReport r;
  r.quiz_id = string_field(value, "quiz_id", "");
  r.quiz_kind = enum_field(value, "quiz_kind", "", &quiz_kind_from_string);
  r.learner = string_field(value, "learner", "");
  r.graded_at = timestamp_field(value, "graded_at", "");
  r.score = rational_from_json(field(value, "score_exact", ""), "score_exact");
  r.classification = enum_field(value, "classification", "", &classification_from_string);
  r.thresholds = thresholds_from_json(field(value, "thresholds", ""));
  const auto& categories = field(value, "per_category", "");
  if (!categories.is_array()) bad("per_category", "expected an array");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string where = "per_category[" + std::to_string(i) + "]";
    CategoryScore c;
    c.concept_id = string_field(categories[i], "concept", where);
    c.weight = rational_from_json(field(categories[i], "weight", where), where + ".weight");
    c.earned = rational_from_json(field(categories[i], "earned", where), where + ".earned");
    r.per_category.push_back(std::move(c));
  }
  const auto& wrong = field(value, "wrong_answers", "");
  if (!wrong.is_array()) bad("wrong_answers", "expected an array");
  for (std::size_t i = 0; i < wrong.size(); ++i) {
    const std::string where = "wrong_answers[" + std::to_string(i) + "]";
    r.wrong_answers.push_back(
        WrongAnswer{string_field(wrong[i], "question", where), string_field(wrong[i], "concept", where)});
  }
  return r;
}

Json to_json(const Recommendation& rec) {
  Json out = Json::object();
  out["id"] = rec.id;
  out["learner"] = rec.learner;
  out["generated_at"] = format_timestamp(rec.generated_at);
  out["origin"] = std::string(to_string(rec.origin));
  out["triggering_concepts"] = rec.triggering_concepts;
  out["units"] = rec.units;
  return out;
}

Recommendation recommendation_from_json(const Json& value) {
  require_object(value, "recommendation");
  Recommendation rec;
  rec.id = string_field(value, "id", "");
  rec.learner = string_field(value, "learner", "");
  rec.generated_at = timestamp_field(value, "generated_at", "");
  rec.origin = enum_field(value, "origin", "", &origin_from_string);
  rec.triggering_concepts = string_list_field(value, "triggering_concepts", "");
  rec.units = string_list_field(value, "units", "");
  return rec;
}

Json to_json(const Reminder& reminder) {
  Json out = Json::object();
  out["learner"] = reminder.learner;
  out["recommendation_id"] = reminder.recommendation_id;
  out["concepts"] = reminder.concepts;
  out["units"] = reminder.units;
  out["interval_seconds"] = reminder.interval.count();
  out["next_fire"] = format_timestamp(reminder.next_fire);
  out["fired_count"] = reminder.fired_count;
  out["cap"] = reminder.cap;
  out["status"] = std::string(to_string(reminder.status));
  return out;
}

Reminder reminder_from_json(const Json& value) {
  require_object(value, "reminder");
  Reminder r;
  r.learner = string_field(value, "learner", "");
  r.recommendation_id = string_field(value, "recommendation_id", "");
  r.concepts = string_list_field(value, "concepts", "");
  r.units = string_list_field(value, "units", "");
  r.interval = std::chrono::seconds(integer_field(value, "interval_seconds", ""));
  r.next_fire = timestamp_field(value, "next_fire", "");
  r.fired_count = static_cast<int>(integer_field(value, "fired_count", ""));
  r.cap = static_cast<int>(integer_field(value, "cap", ""));
  r.status = enum_field(value, "status", "", &reminder_status_from_string);
  return r;
}

Json to_json(const LearnerState& state) {
  Json out = Json::object();
  out["learner"] = state.learner;
  out["state"] = std::string(to_string(state.stage));
  out["assigned_units"] = state.assigned_units;
  out["completed_units"] = std::vector<std::string>(state.completed_units.begin(), state.completed_units.end());
  out["attempt_count"] = state.attempt_count;
  out["open_goal"] = state.open_goal;
  out["needs_intervention"] = state.needs_intervention;
  out["goal_unmet"] = state.goal_unmet;
  return out;
}

LearnerState learner_state_from_json(const Json& value) {
  require_object(value, "state");
  LearnerState s;
  s.learner = string_field(value, "learner", "");
  s.stage = enum_field(value, "state", "", &stage_from_string);
  s.assigned_units = string_list_field(value, "assigned_units", "");
  for (auto& u : string_list_field(value, "completed_units", "")) s.completed_units.insert(std::move(u));
  s.attempt_count = static_cast<int>(integer_field(value, "attempt_count", ""));
  s.open_goal = string_list_field(value, "open_goal", "");
  s.needs_intervention = bool_field(value, "needs_intervention", "");
  s.goal_unmet = bool_field(value, "goal_unmet", "");
  return s;
}

Json to_json(const ProgressEvent& event) {
  Json out = Json::object();
  out["event"] = std::string(to_string(event.kind()));
  out["at"] = format_timestamp(event.at);
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, InitialResult> || std::is_same_v<T, FollowUpResult>) {
          out["report"] = to_json(payload.report);
        } else if constexpr (std::is_same_v<T, UnitCompleted>) {
          out["unit_id"] = payload.unit_id;
        } else if constexpr (std::is_same_v<T, GoalSatisfied>) {
          out["evidence"] = payload.evidence;
        } else if constexpr (std::is_same_v<T, ReminderFired>) {
          out["recommendation_id"] = payload.recommendation_id;
          out["last_active"] = payload.last_active;
        }
      },
      event.payload);
  return out;
}

ProgressEvent progress_event_from_json(const Json& value) {
  require_object(value, "event");
  ProgressEvent e;
  e.at = timestamp_field(value, "at", "");
  switch (enum_field(value, "event", "", &event_kind_from_string)) {
    case ProgressEventKind::InitialResult:
      e.payload = InitialResult{grade_report_from_json(field(value, "report", ""))};
      break;
    case ProgressEventKind::UnitCompleted: e.payload = UnitCompleted{string_field(value, "unit_id", "")}; break;
    case ProgressEventKind::FollowUpResult:
      e.payload = FollowUpResult{grade_report_from_json(field(value, "report", ""))};
      break;
    case ProgressEventKind::GoalSatisfied: e.payload = GoalSatisfied{string_field(value, "evidence", "")}; break;
    case ProgressEventKind::ReminderFired:
      e.payload = ReminderFired{string_field(value, "recommendation_id", ""), bool_field(value, "last_active", "")};
      break;
  }
  return e;
}

Json to_json(const MicrolearningUnit& unit) {
  Json out = Json::object();
  out["id"] = unit.id;
  out["title"] = unit.title;
  out["covers"] = unit.covers;
  out["kind"] = std::string(to_string(unit.kind));
  out["minutes"] = unit.minutes;
  out["uri"] = unit.content_uri;
  out["version"] = unit.version;
  return out;
}

Json to_json(const ConceptGraph& graph) {
  Json out = Json::object();
  Json concepts = Json::array();
  for (const auto& c : graph.concepts()) {
    Json jc = Json::object();
    jc["id"] = c.id;
    jc["title"] = c.title;
    jc["kind"] = std::string(to_string(c.kind));
    jc["description"] = c.description;
    jc["prerequisites"] = Json::array();
    for (const auto& e : graph.edges()) {
      if (e.target == c.id) jc["prerequisites"].push_back(e.prerequisite);
    }
    concepts.push_back(std::move(jc));
  }
  out["concepts"] = std::move(concepts);
  Json edges = Json::array();
  for (const auto& e : graph.edges()) {
    Json je = Json::object();
    je["target"] = e.target;
    je["prerequisite"] = e.prerequisite;
    edges.push_back(std::move(je));
  }
  out["edges"] = std::move(edges);
  Json units = Json::array();
  for (const auto& u : graph.units()) units.push_back(to_json(u));
  out["units"] = std::move(units);
  out["topological_order"] = graph.topological_order();
  return out;
}

Json to_json(const Finding& finding) {
  Json out = Json::object();
  out["severity"] = finding.severity == Severity::error ? "error" : "warning";
  out["code"] = std::string(to_string(finding.code));
  out["message"] = finding.message;
  out["line"] = finding.where.line;
  out["column"] = finding.where.column;
  if (!finding.path.empty()) out["path"] = finding.path;
  return out;
}

Json to_json(const DemandEntry& entry) {
  Json out = Json::object();
  out["unit_id"] = entry.unit_id;
  out["count"] = entry.count;
  return out;
}

Json to_json(const QualityEntry& entry) {
  Json out = Json::object();
  out["unit_id"] = entry.unit_id;
  out["demand_rank"] = entry.demand_rank ? Json(*entry.demand_rank) : Json(nullptr);
  out["demand_count"] = entry.demand_count;
  out["ratings"] = entry.ratings;
  out["mean_rating"] = entry.mean_rating ? Json(to_double(*entry.mean_rating)) : Json("n/a");
  out["flag"] = entry.rework ? Json("rework") : Json(nullptr);
  return out;
}

Json to_json(const stats::CohortComparison& comparison) {
  Json out = Json::object();
  out["n_a"] = comparison.n_a;
  out["n_b"] = comparison.n_b;
  out["mean_diff"] = to_double(comparison.mean_diff);
  out["mean_diff_exact"] = rational_to_json(comparison.mean_diff);
  out["u_statistic"] = comparison.u_statistic;
  out["effect_size"] = comparison.effect_size;
  out["p_value"] = comparison.p_value;
  out["method"] = comparison.method == stats::PValueMethod::exact ? "exact" : "normal_approximation";
  return out;
}

}  // namespace microlearn
