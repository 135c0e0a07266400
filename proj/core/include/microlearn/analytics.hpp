#pragma once

// Demand and content-quality reports computed from the event log.

#include "microlearn/event_log.hpp"
#include "microlearn/rational.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace microlearn {

/// Half-open [from, to); unset bounds are unbounded.
struct TimeWindow {
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;

  bool contains(Timestamp at) const { return (!from || at >= *from) && (!to || at < *to); }
};

enum class FeedbackTag { too_long, unclear, helpful, outdated };
std::string_view to_string(FeedbackTag tag);
FeedbackTag feedback_tag_from_string(std::string_view text);  // throws std::invalid_argument

struct FeedbackEntry {
  std::string learner;
  std::string unit_id;
  int rating = 0;  // 1..5
  std::optional<FeedbackTag> tag;
  Timestamp at{};
};

/// Throws std::invalid_argument unless rating is 1..5 and unit_id is non-empty.
EventRecord feedback_record(const FeedbackEntry& entry);
FeedbackEntry feedback_from_record(const EventRecord& record);

struct DemandEntry {
  std::string unit_id;
  std::size_t count = 0;
  friend bool operator==(const DemandEntry&, const DemandEntry&) = default;
};

/// Units named by recommendation records inside the window, by descending
/// count, ties by unit id.
std::vector<DemandEntry> demand_report(std::span<const EventRecord> log, const TimeWindow& window = {});

struct QualityPolicy {
  Rational top_fraction{1, 4};  // demand ranks within the top quarter count as high demand
  Rational rating_threshold{3};  // mean rating strictly below this flags rework
};

struct QualityEntry {
  std::string unit_id;
  std::optional<std::size_t> demand_rank;  // 1-based; absent when never recommended
  std::size_t demand_count = 0;
  std::size_t ratings = 0;
  std::optional<Rational> mean_rating;  // absent without feedback
  bool rework = false;
};

/// Every unit that was recommended or rated: ranked units first by rank,
/// then unranked ones by id.
std::vector<QualityEntry> quality_report(std::span<const EventRecord> log, const QualityPolicy& policy = {});

}  // namespace microlearn
