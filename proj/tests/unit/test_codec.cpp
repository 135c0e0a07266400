#include "microlearn/codec.hpp"
#include "microlearn/config.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <unistd.h>

using namespace microlearn;

namespace {

Quiz initial() { return quiz_from_json(read_json_file(oracle::fixture("quizzes/initial.json"))); }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const CodecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("quiz round-trips and the learner view hides the key") {
  const auto quiz = initial();
  CHECK(quiz.questions.size() == 12);
  CHECK(quiz.questions[4].weight == Rational(2));
  const auto back = quiz_from_json(to_json(quiz));
  CHECK(to_json(back) == to_json(quiz));
  const auto hidden = to_json(quiz, false);
  for (const auto& q : hidden["questions"]) CHECK_FALSE(q.contains("correct"));
}

TEST_CASE("quizzes without thresholds take the fallback") {
  auto doc = read_json_file(oracle::fixture("quizzes/initial.json"));
  doc.erase("thresholds");
  const Thresholds t{Rational(3, 5), Rational(9, 10)};
  CHECK(quiz_from_json(doc, t).thresholds == t);
}

TEST_CASE("malformed quizzes name the field") {
  auto doc = read_json_file(oracle::fixture("quizzes/initial.json"));
  auto missing = doc;
  missing["questions"][3].erase("concept");
  CHECK(error_of([&] { quiz_from_json(missing); }).find("questions[3]: missing field 'concept'") != std::string::npos);
  auto kind = doc;
  kind["kind"] = "exam";
  CHECK(error_of([&] { quiz_from_json(kind); }).find("kind") != std::string::npos);
  auto weight = doc;
  weight["questions"][0]["weight"] = "heavy";
  CHECK(error_of([&] { quiz_from_json(weight); }).find("questions[0].weight") != std::string::npos);
  auto thresholds = doc;
  thresholds["thresholds"]["min"] = "0.9";
  CHECK_THROWS(quiz_from_json(thresholds));
}

TEST_CASE("grade report, learner state and progress events round-trip") {
  const auto quiz = initial();
  const auto sub = submission_from_json(read_json_file(oracle::fixture("submissions/failing.json")));
  auto report = grade(quiz, sub);
  report.graded_at = parse_timestamp("2026-10-14T10:00:00Z");
  CHECK(grade_report_from_json(to_json(report)) == report);

  LearnerState s;
  s.learner = "p";
  s.stage = LearnerStage::Remediating;
  s.assigned_units = {"u1", "u2"};
  s.completed_units = {"u1"};
  s.attempt_count = 2;
  s.open_goal = {"c"};
  s.needs_intervention = true;
  CHECK(learner_state_from_json(to_json(s)) == s);

  const auto at = parse_timestamp("2026-10-14T10:00:00Z");
  for (const ProgressEvent& e : {ProgressEvent{at, InitialResult{report}}, ProgressEvent{at, UnitCompleted{"u1"}},
                                 ProgressEvent{at, FollowUpResult{report}}, ProgressEvent{at, GoalSatisfied{"acknowledged"}},
                                 ProgressEvent{at, ReminderFired{"rec-3", true}}}) {
    const auto back = progress_event_from_json(to_json(e));
    CHECK(back.kind() == e.kind());
    CHECK(back.at == e.at);
    CHECK(to_json(back) == to_json(e));
  }
}

TEST_CASE("recommendation and reminder round-trip") {
  Recommendation r{"rec-1", "p", parse_timestamp("2026-10-14T10:00:00Z"), {"a"}, {"u1", "u2"},
                   RecommendationOrigin::followup_fail};
  CHECK(recommendation_from_json(to_json(r)) == r);
  const auto reminder = set_reminder(r, {std::chrono::hours(48), 4}, r.generated_at);
  CHECK(reminder_from_json(to_json(reminder)) == reminder);
}

TEST_CASE("answers accept an index or a list") {
  const auto a = answers_from_json(Json::parse(R"({"q1": 2, "q2": [0, 1]})"));
  CHECK(a.at("q1") == ChoiceSet{2});
  CHECK(a.at("q2") == ChoiceSet{0, 1});
  CHECK_THROWS_AS(answers_from_json(Json::parse(R"({"q1": "two"})")), CodecError);
  CHECK_THROWS_AS(answers_from_json(Json::parse(R"({"q1": -1})")), CodecError);
  CHECK_THROWS_AS(answers_from_json(Json::parse(R"([1])")), CodecError);
}

TEST_CASE("rational fields accept numbers and strings") {
  CHECK(rational_from_json(Json("3/4"), "x") == Rational(3, 4));
  CHECK(rational_from_json(Json(2), "x") == Rational(2));
  CHECK(rational_from_json(Json(0.5), "x") == Rational(1, 2));
  CHECK_THROWS_AS(rational_from_json(Json("lots"), "x"), CodecError);
  CHECK(rational_to_json(Rational(3, 4)) == Json("3/4"));
}

TEST_CASE("deployment config resolves paths and rejects bad fields") {
  const auto c = load_config(oracle::fixture("deploy/config.json"));
  CHECK(std::filesystem::equivalent(c.graph, oracle::fixture("cg.mmap")));
  CHECK(c.reminders.interval == std::chrono::hours(48));
  CHECK(c.reminders.cap == 10);
  CHECK(c.durability == Durability::fsync);
  CHECK(c.port == 8080);

  const auto base = oracle::fixture("deploy");
  auto doc = read_json_file(oracle::fixture("deploy/config.json"));
  auto bad = doc;
  bad["reminder"]["cap"] = 0;
  CHECK(error_of([&] { config_from_json(bad, base); }).find("reminder.cap") != std::string::npos);
  bad = doc;
  bad["graph"] = "nowhere.mmap";
  CHECK(error_of([&] { config_from_json(bad, base); }).find("graph") != std::string::npos);
  bad = doc;
  bad["closure_depth"] = "deep";
  CHECK(error_of([&] { config_from_json(bad, base); }).find("closure_depth") != std::string::npos);
  bad = doc;
  bad["durability"] = "maybe";
  CHECK_THROWS_AS(config_from_json(bad, base), CodecError);
  bad = doc;
  bad["listen"]["port"] = 70000;
  CHECK_THROWS_AS(config_from_json(bad, base), CodecError);
}

}
