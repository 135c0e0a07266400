#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace microlearn {

/// UTC instant, seconds precision.
using Timestamp = std::chrono::sys_seconds;

/// "2026-10-14T09:30:00Z"
std::string format_timestamp(Timestamp at);

/// Parses the format produced by format_timestamp. Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Source of "now" for the service layer; tests substitute a manual clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start) : now_(start) {}
  Timestamp now() const override { return now_; }
  void set(Timestamp at) { now_ = at; }
  void advance(std::chrono::seconds by) { now_ += by; }

 private:
  Timestamp now_;
};

}  // namespace microlearn
