#include "microlearn/analytics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace microlearn;

namespace {

const Timestamp t0 = parse_timestamp("2026-10-01T00:00:00Z");

EventRecord recommended(std::vector<std::string> units, int day) {
  EventRecord r;
  r.at = t0 + std::chrono::days(day);
  r.learner = "l";
  r.kind = std::string(event_kind::recommendation);
  r.payload["units"] = units;
  return r;
}

EventRecord rated(const std::string& unit, int rating, int day = 0) {
  return feedback_record({"l", unit, rating, std::nullopt, t0 + std::chrono::days(day)});
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("demand counts with id tie breaks and a half-open window") {
  const std::vector<EventRecord> log{recommended({"b", "a"}, 0), recommended({"c", "a"}, 1), recommended({"b"}, 2),
                                     rated("a", 5)};
  CHECK(demand_report(log) == std::vector<DemandEntry>{{"a", 2}, {"b", 2}, {"c", 1}});
  const TimeWindow window{t0 + std::chrono::days(1), t0 + std::chrono::days(2)};
  CHECK(demand_report(log, window) == std::vector<DemandEntry>{{"a", 1}, {"c", 1}});
  CHECK(demand_report(log, {std::nullopt, t0}).empty());
}

TEST_CASE("demand matches a brute-force count on random logs") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EventRecord> log;
    std::map<std::string, std::size_t> expected;
    const TimeWindow window{t0 + std::chrono::days(3), t0 + std::chrono::days(10)};
    for (int i = 0; i < 60; ++i) {
      std::vector<std::string> units;
      for (int k = 0; k < 3; ++k) units.push_back("u" + std::to_string(rng.uniform_index(8)));
      const int day = static_cast<int>(rng.uniform_index(14));
      log.push_back(recommended(units, day));
      if (day >= 3 && day < 10) {
        for (const auto& u : units) ++expected[u];
      }
    }
    const auto got = demand_report(log, window);
    std::map<std::string, std::size_t> got_map;
    for (const auto& e : got) got_map[e.unit_id] = e.count;
    CHECK(got_map == expected);
    CHECK(std::is_sorted(got.begin(), got.end(), [](const DemandEntry& a, const DemandEntry& b) {
      return a.count != b.count ? a.count > b.count : a.unit_id < b.unit_id;
    }));
  }
}

TEST_CASE("quality flags high-demand units with low ratings") {
  // Eight ranked units: ceil(8 / 4) = 2 ranks count as high demand.
  std::vector<EventRecord> log;
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k <= 8 - i; ++k) log.push_back(recommended({"u" + std::to_string(i)}, 0));
  }
  log.push_back(rated("u0", 2));
  log.push_back(rated("u0", 3));  // mean 5/2 < 3
  log.push_back(rated("u1", 3));  // mean 3, not below
  log.push_back(rated("u2", 1));  // rank 3: outside the top quarter
  log.push_back(rated("orphan", 1));
  const auto q = quality_report(log);
  REQUIRE(q.size() == 9);
  CHECK(q[0].unit_id == "u0");
  CHECK(q[0].demand_rank == 1u);
  CHECK(q[0].ratings == 2);
  CHECK(q[0].mean_rating == Rational(5, 2));
  CHECK(q[0].rework);
  CHECK_FALSE(q[1].rework);
  CHECK(q[2].unit_id == "u2");
  CHECK_FALSE(q[2].rework);
  CHECK_FALSE(q[7].mean_rating.has_value());
  CHECK(q[8].unit_id == "orphan");
  CHECK_FALSE(q[8].demand_rank.has_value());
  CHECK_FALSE(q[8].rework);
}

TEST_CASE("feedback records validate and round-trip") {
  CHECK_THROWS_AS(rated("u", 0), std::invalid_argument);
  CHECK_THROWS_AS(rated("u", 6), std::invalid_argument);
  CHECK_THROWS_AS(rated("", 3), std::invalid_argument);
  const auto r = feedback_record({"l", "u", 4, FeedbackTag::too_long, t0});
  const auto back = feedback_from_record(r);
  CHECK(back.unit_id == "u");
  CHECK(back.rating == 4);
  CHECK(back.tag == FeedbackTag::too_long);
  CHECK_THROWS_AS(feedback_tag_from_string("boring"), std::invalid_argument);
}

}
