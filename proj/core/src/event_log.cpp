#include "microlearn/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <mutex>
#include <sstream>
#include <sys/stat.h>
#include <unistd.h>

namespace microlearn {

std::string encode_record(const EventRecord& record) {
  Json line = Json::object();
  line["seq"] = record.seq;
  line["at"] = format_timestamp(record.at);
  line["learner"] = record.learner;
  line["kind"] = record.kind;
  line["payload"] = record.payload;
  return line.dump();
}

EventRecord decode_record(std::string_view line) {
  Json parsed;
  try {
    parsed = Json::parse(line.begin(), line.end());
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("not JSON: ") + e.what());
  }
  if (!parsed.is_object() || parsed.size() != 5) throw std::invalid_argument("record must be an object with 5 fields");
  auto field = [&](const char* key) -> const Json& {
    auto it = parsed.find(key);
    if (it == parsed.end()) throw std::invalid_argument(std::string("record is missing '") + key + "'");
    return *it;
  };
  const auto& seq = field("seq");
  const auto& at = field("at");
  const auto& learner = field("learner");
  const auto& kind = field("kind");
  const auto& payload = field("payload");
  if (!seq.is_number_unsigned()) throw std::invalid_argument("seq must be a non-negative integer");
  if (!at.is_string() || !learner.is_string() || !kind.is_string()) {
    throw std::invalid_argument("at, learner and kind must be strings");
  }
  if (!payload.is_object()) throw std::invalid_argument("payload must be an object");
  EventRecord r;
  r.seq = seq.get<std::uint64_t>();
  r.at = parse_timestamp(at.get<std::string>());
  r.learner = learner.get<std::string>();
  r.kind = kind.get<std::string>();
  r.payload = payload;
  return r;
}

LogCorrupted::LogCorrupted(std::size_t line, const std::string& reason)
    : StorageError("event log corrupted at line " + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw StorageError(what + ": " + std::strerror(errno));
}

}  // namespace

EventLog::EventLog() = default;

EventLog::EventLog(std::filesystem::path path, Durability durability)
    : path_(std::move(path)), durability_(durability) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0640);
  if (fd_ < 0) throw_errno("cannot open event log " + path_.string());
  try {
    load();
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) {
    if (durability_ == Durability::buffered) ::fsync(fd_);
    ::close(fd_);
  }
}

void EventLog::load() {
  std::string bytes;
  {
    std::ifstream in(path_, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    bytes = buffer.str();
  }

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t good_prefix = 0;
  while (pos < bytes.size()) {
    ++line_no;
    const auto newline = bytes.find('\n', pos);
    const bool complete = newline != std::string::npos;
    const auto end = complete ? newline : bytes.size();
    const std::string_view line(bytes.data() + pos, end - pos);
    const bool is_last = !complete || newline + 1 == bytes.size();

    std::string problem;
    EventRecord record;
    if (!complete) {
      problem = "final line has no newline";
    } else {
      try {
        record = decode_record(line);
        if (!records_.empty() && record.seq <= records_.back().seq) problem = "seq does not increase";
      } catch (const std::exception& e) {
        problem = e.what();
      }
    }

    if (!problem.empty()) {
      if (!is_last) throw LogCorrupted(line_no, problem);
      break;  // torn tail, quarantined below
    }
    by_learner_[record.learner].push_back(records_.size());
    records_.push_back(std::move(record));
    pos = end + 1;
    good_prefix = pos;
  }

  open_report_.records = records_.size();
  if (good_prefix < bytes.size()) {
    open_report_.quarantined = true;
    open_report_.quarantined_bytes = bytes.size() - good_prefix;
    open_report_.quarantine_path = path_.string() + ".quarantine";
    std::ofstream q(open_report_.quarantine_path, std::ios::binary | std::ios::app);
    q.write(bytes.data() + good_prefix, static_cast<std::streamsize>(bytes.size() - good_prefix));
    q.put('\n');
    q.flush();
    if (!q) throw StorageError("cannot write quarantine file " + open_report_.quarantine_path.string());
    if (::ftruncate(fd_, static_cast<off_t>(good_prefix)) != 0) throw_errno("cannot truncate torn event log tail");
    if (::fsync(fd_) != 0) throw_errno("fsync failed");
  }
}

void EventLog::write_all(const std::string& bytes) {
  if (fd_ < 0) return;
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd_, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("event log append failed");
    }
    written += static_cast<std::size_t>(n);
  }
  if (durability_ == Durability::fsync && ::fsync(fd_) != 0) throw_errno("event log fsync failed");
}

std::uint64_t EventLog::append(EventRecord record) {
  std::vector<EventRecord> one;
  one.push_back(std::move(record));
  return append_batch(std::move(one)).front();
}

std::vector<std::uint64_t> EventLog::append_batch(std::vector<EventRecord> records) {
  std::unique_lock lock(mutex_);
  std::uint64_t next = records_.empty() ? 1 : records_.back().seq + 1;
  std::string bytes;
  std::vector<std::uint64_t> seqs;
  seqs.reserve(records.size());
  for (auto& r : records) {
    r.seq = next++;
    try {
      bytes += encode_record(r);
    } catch (const Json::exception& e) {
      throw std::invalid_argument(std::string("record cannot be encoded: ") + e.what());
    }
    bytes += '\n';
    seqs.push_back(r.seq);
  }
  write_all(bytes);
  for (auto& r : records) {
    by_learner_[r.learner].push_back(records_.size());
    records_.push_back(std::move(r));
  }
  return seqs;
}

std::vector<EventRecord> EventLog::replay(std::string_view learner) const {
  std::shared_lock lock(mutex_);
  std::vector<EventRecord> out;
  if (auto it = by_learner_.find(std::string(learner)); it != by_learner_.end()) {
    out.reserve(it->second.size());
    for (auto i : it->second) out.push_back(records_[i]);
  }
  return out;
}

std::vector<EventRecord> EventLog::snapshot() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::size_t EventLog::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::uint64_t EventLog::last_seq() const {
  std::shared_lock lock(mutex_);
  return records_.empty() ? 0 : records_.back().seq;
}

std::string EventLog::export_text() const {
  std::shared_lock lock(mutex_);
  std::string out;
  for (const auto& r : records_) {
    out += encode_record(r);
    out += '\n';
  }
  return out;
}

}  // namespace microlearn
