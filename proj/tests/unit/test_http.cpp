#include "microlearn/codec.hpp"
#include "microlearn/http_server.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <thread>
#include <unistd.h>

using namespace microlearn;

namespace {

/// Service on an ephemeral port with an in-memory log.
struct Served {
  ManualClock clock{parse_timestamp("2026-10-14T09:00:00Z")};
  std::unique_ptr<LearningService> service;
  std::unique_ptr<HttpServer> server;
  std::thread thread;
  int port = -1;

  Served() {
    DeploymentConfig config;
    config.graph = oracle::fixture("cg.mmap");
    config.quiz_dir = oracle::fixture("quizzes");
    service = std::make_unique<LearningService>(config, load_catalog(config), std::make_unique<EventLog>(),
                                                Pseudonymizer("http-test-key-0123456789"), clock);
    server = std::make_unique<HttpServer>(*service);
    port = server->bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { server->run(); });
    server->wait_until_ready();
  }
  ~Served() {
    server->stop();
    thread.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

httplib::Headers as_learner(const std::string& identity) { return {{"X-Learner-Identity", identity}}; }
httplib::Headers as_role(const std::string& role) { return {{"X-Role", role}}; }

std::string error_code(const httplib::Result& res) { return Json::parse(res->body)["error"]["code"]; }

}  // namespace

TEST_SUITE("http") {

TEST_CASE("catalog endpoints") {
  Served s;
  auto c = s.client();
  auto health = c.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto graph = c.Get("/v1/graph");
  REQUIRE(graph);
  CHECK(Json::parse(graph->body)["concepts"].size() == 6);

  auto units = c.Get("/v1/units");
  CHECK(Json::parse(units->body).size() == 8);
  CHECK(c.Get("/v1/units/u-camera")->status == 200);
  CHECK(c.Get("/v1/units/u-nope")->status == 404);

  auto quiz = c.Get("/v1/quizzes/cg-initial");
  REQUIRE(quiz->status == 200);
  CHECK(quiz->body.find("\"correct\"") == std::string::npos);
  CHECK(c.Get("/v1/quizzes/nope")->status == 404);
  CHECK(c.Get("/v1/nothing-here")->status == 404);
}

TEST_CASE("malformed requests are 4xx") {
  Served s;
  auto c = s.client();
  const auto me = as_learner("mary@example.org");
  auto res = c.Post("/v1/submissions", me, "{not json", "application/json");
  CHECK(res->status == 400);
  CHECK(error_code(res) == "bad_request");
  CHECK(c.Post("/v1/submissions", me, "[]", "application/json")->status == 400);
  CHECK(c.Post("/v1/submissions", me, R"({"answers": {}})", "application/json")->status == 400);
  CHECK(c.Post("/v1/submissions", me, R"({"quiz_id": "cg-initial"})", "application/json")->status == 400);
  CHECK(c.Post("/v1/submissions", me, R"({"quiz_id": "cg-initial", "answers": {"q1": "x"}})", "application/json")
            ->status == 400);
  CHECK(c.Post("/v1/submissions", R"({"quiz_id": "cg-initial", "answers": {}})", "application/json")->status == 400);
  res = c.Post("/v1/submissions", me, R"({"quiz_id": "ghost", "answers": {}})", "application/json");
  CHECK(res->status == 404);
  CHECK(error_code(res) == "not_found");
  CHECK(c.Post("/v1/feedback", me, R"({"unit_id": "u-camera", "rating": 7})", "application/json")->status == 400);
  CHECK(c.Get("/v1/reports/demand", as_role("superuser"))->status == 400);
}

TEST_CASE("roles gate other learners, reports and admin") {
  Served s;
  auto c = s.client();
  auto res = c.Post("/v1/submissions", as_learner("mary@example.org"), R"({"quiz_id": "cg-initial", "answers": {}})",
                    "application/json");
  REQUIRE(res->status == 201);
  const std::string mary = Json::parse(res->body)["learner"];
  CHECK(Json::parse(res->body)["state"]["state"] == "Remediating");

  CHECK(c.Get("/v1/learners/" + mary + "/state", as_learner("mary@example.org"))->status == 200);
  res = c.Get("/v1/learners/" + mary + "/state", as_learner("eve@example.org"));
  CHECK(res->status == 403);
  CHECK(error_code(res) == "forbidden");
  CHECK(c.Get("/v1/learners/" + mary + "/recommendations", as_role("instructor"))->status == 200);
  CHECK(c.Get("/v1/reports/demand", as_learner("mary@example.org"))->status == 403);
  CHECK(c.Get("/v1/reports/demand", as_role("instructor"))->status == 200);
  CHECK(c.Get("/v1/export/log", as_learner("mary@example.org"))->status == 403);
  CHECK(c.Post("/v1/admin/reload", as_role("instructor"), "", "application/json")->status == 403);
  CHECK(c.Post("/v1/admin/fire-reminders", as_role("admin"), "", "application/json")->status == 200);
  CHECK(c.Post("/v1/learners/" + mary + "/goal-satisfied", as_learner("eve@example.org"), "", "application/json")
            ->status == 403);
  CHECK(c.Post("/v1/learners/" + mary + "/goal-satisfied", as_role("instructor"), "", "application/json")->status ==
        400);  // learner-only: no identity header
}

TEST_CASE("conflicts are 409") {
  Served s;
  auto c = s.client();
  const auto me = as_learner("ida@example.org");
  CHECK(c.Post("/v1/submissions", me, R"({"quiz_id": "cg-follow-up", "answers": {}})", "application/json")->status ==
        409);
  auto first = c.Post("/v1/submissions", me, R"({"quiz_id": "cg-initial", "answers": {}})", "application/json");
  REQUIRE(first->status == 201);
  const auto body = Json::parse(first->body);
  CHECK(body["recommendation"]["unit_details"].size() == body["recommendation"]["units"].size());
  auto again = c.Post("/v1/submissions", me, R"({"quiz_id": "cg-initial", "answers": {}})", "application/json");
  CHECK(again->status == 409);
  CHECK(error_code(again) == "conflict");
  CHECK(c.Post("/v1/learners/" + body["learner"].get<std::string>() + "/goal-satisfied", me, "", "application/json")
            ->status == 409);
}

TEST_CASE("cohort report") {
  Served s;
  auto c = s.client();
  auto res = c.Post("/v1/reports/cohort", as_role("instructor"), R"({"a": ["0.1", 0.2, "3/10"], "b": [0.7, 0.8, 0.9]})",
                    "application/json");
  REQUIRE(res->status == 200);
  const auto body = Json::parse(res->body);
  CHECK(body["p_value"] == 0.1);
  CHECK(body["method"] == "exact");
  CHECK(c.Post("/v1/reports/cohort", as_role("instructor"), R"({"a": [], "b": [1]})", "application/json")->status ==
        400);
}

}
