#include "microlearn/codec.hpp"
#include "microlearn/learning_service.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <unistd.h>

using namespace microlearn;
using namespace std::chrono_literals;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("microlearn-svc-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Deployment with its own copies of the fixture graph and quizzes.
struct Deployment {
  std::filesystem::path dir;
  DeploymentConfig config;
  ManualClock clock{parse_timestamp("2026-10-14T09:00:00Z")};

  explicit Deployment(const std::string& name) : dir(scratch(name)) {
    std::filesystem::copy_file(oracle::fixture("cg.mmap"), dir / "cg.mmap");
    std::filesystem::copy(oracle::fixture("quizzes"), dir / "quizzes");
    std::ofstream(dir / "key") << "service-test-key-0123456789";
    std::ofstream(dir / "config.json") << R"({"graph": "cg.mmap", "quiz_dir": "quizzes", "log": "events.ndjson",
      "pseudonym_key_file": "key", "durability": "buffered", "reminder": {"interval_hours": 48, "cap": 3}})";
    config = load_config(dir / "config.json");
  }
  ~Deployment() { std::filesystem::remove_all(dir); }

  std::unique_ptr<LearningService> open() { return LearningService::open(config, clock); }
};

Quiz quiz(const char* file) { return quiz_from_json(read_json_file(oracle::fixture(std::string("quizzes/") + file))); }

/// The first `right` questions answered correctly, the rest wrong.
std::map<std::string, ChoiceSet> answers(const Quiz& q, std::size_t right) {
  std::map<std::string, ChoiceSet> out;
  for (std::size_t i = 0; i < q.questions.size(); ++i) {
    const auto& question = q.questions[i];
    out[question.id] = i < right ? question.correct : ChoiceSet{(*question.correct.begin() + 1) % question.choices.size()};
  }
  return out;
}

ServiceError::Code code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.code();
  }
  FAIL("no ServiceError");
  return ServiceError::Code::storage;
}

void check_replay_matches(const LearningService& svc) {
  const auto views = replay_log(svc.log().snapshot());
  for (const auto& p : svc.learners()) {
    CAPTURE(p);
    REQUIRE(views.contains(p));
    CHECK(views.at(p) == svc.learner(p));
  }
  CHECK(views.size() == svc.learners().size());
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("fail, remediate, pass; the log rebuilds the same views") {
  Deployment d("flow");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("grace@example.org");
  CHECK(is_pseudonym(p));

  const auto initial = quiz("initial.json");
  auto r = svc->submit(p, initial.id, answers(initial, 0));
  CHECK(r.report.classification == Classification::Fail);
  CHECK(r.state.stage == LearnerStage::Remediating);
  REQUIRE(r.recommendation.has_value());
  CHECK(r.recommendation->id == "rec-1");
  CHECK_FALSE(r.reminder.has_value());

  for (const auto& u : r.recommendation->units) svc->complete_unit(p, u);
  CHECK(svc->learner(p).state.stage == LearnerStage::AwaitingFollowUp);

  const auto follow_up = quiz("follow_up.json");
  r = svc->submit(p, follow_up.id, answers(follow_up, follow_up.questions.size()));
  CHECK(r.state.stage == LearnerStage::Cleared);
  CHECK(svc->learner(p).reports.size() == 2);
  check_replay_matches(*svc);

  CHECK(svc->log().export_text().find("grace@example.org") == std::string::npos);
  const auto demand = svc->demand({});
  CHECK(!demand.empty());
}

TEST_CASE("stage guards") {
  Deployment d("guards");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("alan@example.org");
  const auto initial = quiz("initial.json");
  const auto follow_up = quiz("follow_up.json");

  CHECK(code_of([&] { svc->submit(p, follow_up.id, answers(follow_up, 0)); }) == ServiceError::Code::conflict);
  CHECK(code_of([&] { svc->submit(p, "no-such-quiz", {}); }) == ServiceError::Code::not_found);
  CHECK(code_of([&] { svc->submit("not-a-pseudonym", initial.id, {}); }) == ServiceError::Code::bad_request);
  CHECK(code_of([&] { svc->submit(p, initial.id, {{"q1", {9}}}); }) == ServiceError::Code::bad_request);
  CHECK(code_of([&] { svc->acknowledge_goal(p); }) == ServiceError::Code::conflict);

  const auto r = svc->submit(p, initial.id, answers(initial, 0));
  CHECK(code_of([&] { svc->submit(p, initial.id, answers(initial, 0)); }) == ServiceError::Code::conflict);
  CHECK(code_of([&] { svc->complete_unit(p, "u-nope"); }) == ServiceError::Code::not_found);
  const auto& assigned = r.state.assigned_units;
  for (const auto& u : svc->catalog()->graph.units()) {
    if (std::find(assigned.begin(), assigned.end(), u.id) == assigned.end()) {
      CHECK(code_of([&] { svc->complete_unit(p, u.id); }) == ServiceError::Code::conflict);
      break;
    }
  }
  check_replay_matches(*svc);
}

TEST_CASE("advice: reminders fire on schedule and a micro-test satisfies the goal") {
  Deployment d("advice");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("katherine@example.org");
  const auto initial = quiz("initial.json");
  const auto r = svc->submit(p, initial.id, answers(initial, 8));  // 12 of 20 weight
  CHECK(r.report.score == Rational(3, 5));
  CHECK(r.state.stage == LearnerStage::ClearedWithAdvice);
  REQUIRE(r.reminder.has_value());
  CHECK(r.reminder->next_fire == d.clock.now() + 48h);

  CHECK(svc->fire_due_reminders().empty());
  d.clock.advance(48h);
  const auto fired = svc->fire_due_reminders();
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].learner == p);
  CHECK(svc->fire_due_reminders().empty());
  CHECK(svc->learner(p).reminders.front().fired_count == 1);

  const auto micro = quiz("micro_test.json");
  const auto m = svc->submit(p, micro.id, answers(micro, micro.questions.size()));
  CHECK(m.goal_satisfied);
  CHECK(m.state.stage == LearnerStage::Cleared);
  CHECK(svc->learner(p).reminders.front().status == ReminderStatus::satisfied);
  d.clock.advance(480h);
  CHECK(svc->fire_due_reminders().empty());
  check_replay_matches(*svc);
}

TEST_CASE("unanswered reminders expire and close the goal as unmet") {
  Deployment d("expire");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("barbara@example.org");
  const auto initial = quiz("initial.json");
  svc->submit(p, initial.id, answers(initial, 8));
  for (int i = 0; i < 3; ++i) {
    d.clock.advance(48h);
    CHECK(svc->fire_due_reminders().size() == 1);
  }
  const auto s = svc->learner(p).state;
  CHECK(s.stage == LearnerStage::Cleared);
  CHECK(s.goal_unmet);
  CHECK(svc->learner(p).reminders.front().status == ReminderStatus::expired);
  check_replay_matches(*svc);
}

TEST_CASE("acknowledging the goal clears the learner") {
  Deployment d("ack");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("edsger@example.org");
  const auto initial = quiz("initial.json");
  svc->submit(p, initial.id, answers(initial, 8));
  CHECK(svc->acknowledge_goal(p).stage == LearnerStage::Cleared);
  CHECK(code_of([&] { svc->acknowledge_goal(p); }) == ServiceError::Code::conflict);
  check_replay_matches(*svc);
}

TEST_CASE("feedback feeds the quality report") {
  Deployment d("feedback");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("tim@example.org");
  CHECK(code_of([&] { svc->feedback(p, "u-camera", 9, std::nullopt); }) == ServiceError::Code::bad_request);
  CHECK(code_of([&] { svc->feedback(p, "u-nope", 3, std::nullopt); }) == ServiceError::Code::not_found);
  svc->feedback(p, "u-camera", 2, FeedbackTag::unclear);
  svc->feedback(p, "u-camera", 1, std::nullopt);
  const auto q = svc->quality();
  REQUIRE(q.size() == 1);
  CHECK(q[0].unit_id == "u-camera");
  CHECK(q[0].mean_rating == Rational(3, 2));
}

TEST_CASE("state survives a restart") {
  Deployment d("restart");
  std::string p;
  std::map<std::string, LearnerRecord> before;
  {
    auto svc = d.open();
    p = svc->pseudonym_for("linus@example.org");
    const auto initial = quiz("initial.json");
    const auto r = svc->submit(p, initial.id, answers(initial, 0));
    svc->complete_unit(p, r.recommendation->units.front());
    for (const auto& l : svc->learners()) before[l] = svc->learner(l);
  }
  auto svc = d.open();
  for (const auto& [l, rec] : before) CHECK(svc->learner(l) == rec);
  // Per-learner recommendation ids keep counting after a restart.
  for (const auto& u : svc->learner(p).state.assigned_units) {
    if (!svc->learner(p).state.completed_units.contains(u)) svc->complete_unit(p, u);
  }
  const auto follow_up = quiz("follow_up.json");
  CHECK(svc->submit(p, follow_up.id, answers(follow_up, 0)).recommendation->id == "rec-2");
}

TEST_CASE("reload swaps the catalog only when the new one is valid") {
  Deployment d("reload");
  auto svc = d.open();
  const auto p = svc->pseudonym_for("donald@example.org");
  const auto initial = quiz("initial.json");
  svc->submit(p, initial.id, answers(initial, 0));
  const auto old_catalog = svc->catalog();

  { std::ofstream(d.dir / "cg.mmap", std::ios::app) << "requires vectors <- shading\n"; }
  CHECK(code_of([&] { svc->reload(); }) == ServiceError::Code::bad_request);
  CHECK(svc->catalog() == old_catalog);

  std::filesystem::copy_file(oracle::fixture("cg.mmap"), d.dir / "cg.mmap",
                             std::filesystem::copy_options::overwrite_existing);
  {
    std::ofstream(d.dir / "cg.mmap", std::ios::app)
        << "unit u-extra \"Extra camera notes\" covers projection kind=text minutes=4 uri=\"notes/camera.html\"\n";
  }
  svc->reload();
  CHECK(svc->catalog()->graph.find_unit("u-extra") != nullptr);
  CHECK(old_catalog->graph.find_unit("u-extra") == nullptr);
  check_replay_matches(*svc);
}

}
