#pragma once

// JSON forms of the domain types. These are the quiz/submission file formats,
// the HTTP bodies, and the event-log payloads; docs/formats.md describes each.

#include "microlearn/analytics.hpp"
#include "microlearn/assessment.hpp"
#include "microlearn/event_log.hpp"
#include "microlearn/knowledge_graph.hpp"
#include "microlearn/progression.hpp"
#include "microlearn/recommender.hpp"
#include "microlearn/statistics.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace microlearn {

/// Malformed document; the message names the offending field path.
class CodecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json read_json_file(const std::filesystem::path& path);  // throws CodecError
std::string read_text_file(const std::filesystem::path& path);  // throws CodecError

/// Numbers or strings ("3/4", "0.75").
Rational rational_from_json(const Json& value, const std::string& where);
Json rational_to_json(const Rational& value);

Json to_json(const Thresholds& thresholds);
Thresholds thresholds_from_json(const Json& value);

/// `include_answer_key` false strips the correct sets (what learners see).
Json to_json(const Quiz& quiz, bool include_answer_key = true);
Quiz quiz_from_json(const Json& value, const Thresholds& fallback = kDefaultThresholds);

Json to_json(const Submission& submission);
Submission submission_from_json(const Json& value);
std::map<std::string, ChoiceSet> answers_from_json(const Json& value);

Json to_json(const GradeReport& report);
GradeReport grade_report_from_json(const Json& value);

Json to_json(const Recommendation& rec);
Recommendation recommendation_from_json(const Json& value);

Json to_json(const Reminder& reminder);
Reminder reminder_from_json(const Json& value);

Json to_json(const LearnerState& state);
LearnerState learner_state_from_json(const Json& value);

Json to_json(const ProgressEvent& event);
ProgressEvent progress_event_from_json(const Json& value);

Json to_json(const MicrolearningUnit& unit);
Json to_json(const ConceptGraph& graph);
Json to_json(const Finding& finding);

Json to_json(const DemandEntry& entry);
Json to_json(const QualityEntry& entry);
Json to_json(const stats::CohortComparison& comparison);

}  // namespace microlearn
