#include "microlearn/analytics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace microlearn {

std::string_view to_string(FeedbackTag tag) {
  switch (tag) {
    case FeedbackTag::too_long: return "too_long";
    case FeedbackTag::unclear: return "unclear";
    case FeedbackTag::helpful: return "helpful";
    case FeedbackTag::outdated: return "outdated";
  }
  return "helpful";
}

FeedbackTag feedback_tag_from_string(std::string_view text) {
  for (auto t : {FeedbackTag::too_long, FeedbackTag::unclear, FeedbackTag::helpful, FeedbackTag::outdated}) {
    if (text == to_string(t)) return t;
  }
  throw std::invalid_argument("feedback tag must be too_long, unclear, helpful or outdated");
}

EventRecord feedback_record(const FeedbackEntry& entry) {
  if (entry.rating < 1 || entry.rating > 5) throw std::invalid_argument("rating must be an integer 1..5");
  if (entry.unit_id.empty()) throw std::invalid_argument("feedback needs a unit id");
  EventRecord r;
  r.at = entry.at;
  r.learner = entry.learner;
  r.kind = std::string(event_kind::feedback);
  r.payload["unit_id"] = entry.unit_id;
  r.payload["rating"] = entry.rating;
  r.payload["tag"] = entry.tag ? Json(std::string(to_string(*entry.tag))) : Json(nullptr);
  return r;
}

FeedbackEntry feedback_from_record(const EventRecord& record) {
  FeedbackEntry entry;
  entry.learner = record.learner;
  entry.at = record.at;
  entry.unit_id = record.payload.at("unit_id").get<std::string>();
  entry.rating = record.payload.at("rating").get<int>();
  if (const auto& tag = record.payload.at("tag"); !tag.is_null()) entry.tag = feedback_tag_from_string(tag.get<std::string>());
  return entry;
}

std::vector<DemandEntry> demand_report(std::span<const EventRecord> log, const TimeWindow& window) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : log) {
    if (r.kind != event_kind::recommendation || !window.contains(r.at)) continue;
    for (const auto& unit : r.payload.at("units")) ++counts[unit.get<std::string>()];
  }
  std::vector<DemandEntry> out;
  out.reserve(counts.size());
  for (auto& [unit, count] : counts) out.push_back(DemandEntry{unit, count});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

std::vector<QualityEntry> quality_report(std::span<const EventRecord> log, const QualityPolicy& policy) {
  const auto demand = demand_report(log);
  std::map<std::string, QualityEntry> entries;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    auto& e = entries[demand[i].unit_id];
    e.unit_id = demand[i].unit_id;
    e.demand_rank = i + 1;
    e.demand_count = demand[i].count;
  }

  std::map<std::string, std::int64_t> rating_sum;
  for (const auto& r : log) {
    if (r.kind != event_kind::feedback) continue;
    const auto fb = feedback_from_record(r);
    auto& e = entries[fb.unit_id];
    e.unit_id = fb.unit_id;
    ++e.ratings;
    rating_sum[fb.unit_id] += fb.rating;
  }

  // Number of ranks that count as high demand: ceil(ranked * top_fraction).
  const auto ranked = static_cast<std::int64_t>(demand.size());
  const auto num = policy.top_fraction.numerator();
  const auto den = policy.top_fraction.denominator();
  const auto high_demand_ranks = static_cast<std::size_t>((ranked * num + den - 1) / den);

  std::vector<QualityEntry> out;
  out.reserve(entries.size());
  for (auto& [unit, e] : entries) {
    if (e.ratings > 0) e.mean_rating = Rational(rating_sum[unit], static_cast<std::int64_t>(e.ratings));
    e.rework = e.demand_rank && *e.demand_rank <= high_demand_ranks && e.mean_rating &&
               *e.mean_rating < policy.rating_threshold;
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const QualityEntry& a, const QualityEntry& b) {
    if (a.demand_rank.has_value() != b.demand_rank.has_value()) return a.demand_rank.has_value();
    return a.demand_rank && *a.demand_rank < *b.demand_rank;
  });
  return out;
}

}  // namespace microlearn
