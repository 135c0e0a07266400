#include "microlearn/codec.hpp"
#include "microlearn/progression.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace microlearn;

namespace {

ConceptGraph cg() { return parse_mindmap(read_text_file(oracle::fixture("cg.mmap"))); }

const Timestamp t0 = parse_timestamp("2026-10-14T09:00:00Z");

GradeReport report(QuizKind kind, Classification band, std::vector<std::string> wrong) {
  GradeReport r;
  r.learner = "l";
  r.quiz_kind = kind;
  r.classification = band;
  for (std::size_t i = 0; i < wrong.size(); ++i) r.wrong_answers.push_back({"q" + std::to_string(i), wrong[i]});
  return r;
}

template <typename T>
std::size_t count_effects(const Transition& t) {
  std::size_t n = 0;
  for (const auto& e : t.effects) n += std::holds_alternative<T>(e) ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("progression") {

TEST_CASE("legal pairs are exactly the table") {
  for (auto s : kAllStages) {
    for (auto k : kAllEventKinds) {
      CAPTURE(to_string(s));
      CAPTURE(to_string(k));
      CHECK(accepts(s, k) == oracle::table_accepts(s, k));
    }
  }
}

TEST_CASE("fail, study, follow-up pass") {
  const auto g = cg();
  const ProgressionPolicy policy;
  LearnerState s;
  s.learner = "l";

  auto t = apply_event(s, {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"projection"})}}, g,
                       policy);
  CHECK(t.state.stage == LearnerStage::Remediating);
  CHECK(t.state.assigned_units == std::vector<std::string>{"u-camera"});
  REQUIRE(count_effects<IssueRecommendation>(t) == 1);
  CHECK_FALSE(std::get<IssueRecommendation>(t.effects[0]).schedule_reminder);

  t = apply_event(t.state, {t0, UnitCompleted{"u-camera"}}, g, policy);
  CHECK(t.state.stage == LearnerStage::AwaitingFollowUp);

  t = apply_event(t.state, {t0, FollowUpResult{report(QuizKind::follow_up, Classification::Pass, {})}}, g, policy);
  CHECK(t.state.stage == LearnerStage::Cleared);
  CHECK(t.state.attempt_count == 1);
  CHECK_THROWS_AS(apply_event(t.state, {t0, UnitCompleted{"u-camera"}}, g, policy), IllegalTransition);
}

TEST_CASE("remediation waits for every assigned unit") {
  const auto g = cg();
  LearnerState s;
  s = apply_event(s, {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"rasterization"})}}, g, {})
          .state;
  REQUIRE(s.assigned_units.size() == 2);
  s = apply_event(s, {t0, UnitCompleted{"u-raster-video"}}, g, {}).state;
  CHECK(s.stage == LearnerStage::Remediating);
  s = apply_event(s, {t0, UnitCompleted{"u-phong"}}, g, {}).state;  // not assigned: ignored
  CHECK(s.stage == LearnerStage::Remediating);
  CHECK_FALSE(s.completed_units.contains("u-phong"));
  s = apply_event(s, {t0, UnitCompleted{"u-raster-quiz"}}, g, {}).state;
  CHECK(s.stage == LearnerStage::AwaitingFollowUp);
}

TEST_CASE("pass with remediation opens a goal with a reminder") {
  const auto g = cg();
  LearnerState s;
  auto t = apply_event(
      s, {t0, InitialResult{report(QuizKind::initial, Classification::PassWithRemediation, {"vectors"})}}, g, {});
  CHECK(t.state.stage == LearnerStage::ClearedWithAdvice);
  CHECK(t.state.open_goal == std::vector<std::string>{"vectors"});
  REQUIRE(count_effects<IssueRecommendation>(t) == 1);
  CHECK(std::get<IssueRecommendation>(t.effects[0]).schedule_reminder);
  CHECK(std::get<IssueRecommendation>(t.effects[0]).recommendation.origin == RecommendationOrigin::followup_remediation);

  auto reminded = apply_event(t.state, {t0, ReminderFired{"rec-1", false}}, g, {});
  CHECK(reminded.state.stage == LearnerStage::ClearedWithAdvice);
  auto done = apply_event(t.state, {t0, GoalSatisfied{"acknowledged"}}, g, {});
  CHECK(done.state.stage == LearnerStage::Cleared);
  CHECK(count_effects<SatisfyReminders>(done) == 1);
  CHECK_FALSE(done.state.goal_unmet);
  auto expired = apply_event(t.state, {t0, ReminderFired{"rec-1", true}}, g, {});
  CHECK(expired.state.stage == LearnerStage::Cleared);
  CHECK(expired.state.goal_unmet);
}

TEST_CASE("fail with nothing to study goes straight to follow-up and flags intervention") {
  const auto g = parse_mindmap(
      "concept a \"A\"\nconcept b \"B\"\nrequires b <- a\nunit u \"U\" covers a kind=text minutes=5 uri=\"u\"\n");
  LearnerState s;
  auto t = apply_event(s, {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"b"})}}, g, {});
  CHECK(t.state.stage == LearnerStage::AwaitingFollowUp);
  CHECK(t.state.needs_intervention);
  CHECK(t.state.assigned_units.empty());
  CHECK(count_effects<FlagForIntervention>(t) == 1);
}

TEST_CASE("repeated follow-up failures flag intervention once at the attempt limit") {
  const auto g = cg();
  const ProgressionPolicy policy{ClosureDepth::direct, 2};
  LearnerState s;
  s = apply_event(s, {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"vectors"})}}, g, policy)
          .state;
  std::size_t flags = 0;
  for (int attempt = 1; attempt <= 4; ++attempt) {
    for (const auto& u : std::vector<std::string>(s.assigned_units)) {
      s = apply_event(s, {t0, UnitCompleted{u}}, g, policy).state;
    }
    REQUIRE(s.stage == LearnerStage::AwaitingFollowUp);
    auto t = apply_event(s, {t0, FollowUpResult{report(QuizKind::follow_up, Classification::Fail, {"vectors"})}}, g,
                         policy);
    flags += count_effects<FlagForIntervention>(t);
    s = t.state;
    CHECK(s.attempt_count == attempt);
    CHECK(s.needs_intervention == (attempt >= 2));
    CHECK(s.completed_units.empty());
  }
  CHECK(flags == 1);
}

TEST_CASE("illegal events leave the state untouched") {
  const auto g = cg();
  LearnerState s;
  s.learner = "l";
  try {
    (void)apply_event(s, {t0, GoalSatisfied{"x"}}, g, {});
    FAIL("accepted GoalSatisfied in NotAssessed");
  } catch (const IllegalTransition& e) {
    CHECK(e.from() == LearnerStage::NotAssessed);
    CHECK(e.on() == ProgressEventKind::GoalSatisfied);
  }
  CHECK(s == LearnerState{"l"});
}

TEST_CASE("reports naming unknown concepts are rejected") {
  LearnerState s;
  CHECK_THROWS_AS(
      apply_event(s, {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"ghost"})}}, cg(), {}),
      GraphError);
}

TEST_CASE("replay folds from NotAssessed") {
  const auto g = cg();
  std::vector<ProgressEvent> events{
      {t0, InitialResult{report(QuizKind::initial, Classification::Fail, {"projection"})}},
      {t0, UnitCompleted{"u-camera"}},
      {t0, FollowUpResult{report(QuizKind::follow_up, Classification::PassWithRemediation, {"shading"})}},
  };
  const auto s = replay("l", events, g, {});
  CHECK(s.learner == "l");
  CHECK(s.stage == LearnerStage::ClearedWithAdvice);
  CHECK(s.open_goal == std::vector<std::string>{"shading"});
}

}
