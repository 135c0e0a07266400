#pragma once

// Append-only, newline-delimited JSON event log. One record per line:
//   {"seq":N,"at":"2026-10-14T09:30:00Z","learner":"<pseudonym>","kind":"...","payload":{...}}
// Keys are written in that order and payloads keep their insertion order, so
// decoding and re-encoding a line reproduces it byte for byte.

#include "microlearn/time.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace microlearn {

using Json = nlohmann::ordered_json;

namespace event_kind {
inline constexpr std::string_view graph_snapshot = "graph_snapshot";
inline constexpr std::string_view submission = "submission";
inline constexpr std::string_view progress = "progress";
inline constexpr std::string_view recommendation = "recommendation";
inline constexpr std::string_view reminder_set = "reminder_set";
inline constexpr std::string_view reminder_fired = "reminder_fired";
inline constexpr std::string_view reminder_satisfied = "reminder_satisfied";
inline constexpr std::string_view feedback = "feedback";
inline constexpr std::string_view intervention = "intervention";
}  // namespace event_kind

struct EventRecord {
  std::uint64_t seq = 0;
  Timestamp at{};
  std::string learner;  // empty for deployment-level records
  std::string kind;
  Json payload = Json::object();

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// One line, no trailing newline.
std::string encode_record(const EventRecord& record);

/// Throws std::invalid_argument on anything that is not a well-formed record.
EventRecord decode_record(std::string_view line);

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A complete line in the middle of the log failed to decode or broke seq order.
class LogCorrupted : public StorageError {
 public:
  LogCorrupted(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class Durability {
  fsync,     // every append is fsync'ed before it is acknowledged
  buffered,  // written with write(2); the kernel decides when it hits disk
};

struct OpenReport {
  std::size_t records = 0;
  bool quarantined = false;
  std::size_t quarantined_bytes = 0;
  std::filesystem::path quarantine_path;
};

/// Thread-safe: appends are serialized, readers see a consistent prefix.
class EventLog {
 public:
  /// In-memory log (nothing persisted).
  EventLog();

  /// Opens or creates the file and loads it. A torn final line (no newline,
  /// or unparsable) is moved to "<path>.quarantine" and cut from the log;
  /// corruption before the final line throws LogCorrupted.
  explicit EventLog(std::filesystem::path path, Durability durability = Durability::fsync);
  ~EventLog();

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Assigns the next seq (ignoring record.seq) and returns it once durable.
  std::uint64_t append(EventRecord record);

  /// Appends all records with one write and at most one fsync; returns their seqs.
  std::vector<std::uint64_t> append_batch(std::vector<EventRecord> records);

  /// All of the learner's records in seq order; unknown learners give [].
  std::vector<EventRecord> replay(std::string_view learner) const;

  std::vector<EventRecord> snapshot() const;
  std::size_t size() const;
  std::uint64_t last_seq() const;

  /// The log in its file format (what the export endpoint serves).
  std::string export_text() const;

  const OpenReport& open_report() const noexcept { return open_report_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void load();
  void write_all(const std::string& bytes);

  std::filesystem::path path_;
  Durability durability_ = Durability::fsync;
  int fd_ = -1;
  OpenReport open_report_;

  mutable std::shared_mutex mutex_;
  std::vector<EventRecord> records_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_learner_;
};

}  // namespace microlearn
