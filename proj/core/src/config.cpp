#include "microlearn/config.hpp"

#include "microlearn/codec.hpp"

namespace microlearn {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw CodecError("config." + field + ": " + what);
}

std::filesystem::path existing_path(const Json& doc, const char* key, const std::filesystem::path& base) {
  if (!doc.contains(key) || !doc[key].is_string()) bad(key, "required path");
  auto p = base / doc[key].get<std::string>();
  if (!std::filesystem::exists(p)) bad(key, "not found: " + p.string());
  return p;
}

std::int64_t positive_integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) bad(field, "must be a positive integer");
  return v.get<std::int64_t>();
}

}  // namespace

DeploymentConfig config_from_json(const Json& doc, const std::filesystem::path& base) {
  if (!doc.is_object()) throw CodecError("config must be an object");
  DeploymentConfig c;
  c.graph = existing_path(doc, "graph", base);
  c.quiz_dir = existing_path(doc, "quiz_dir", base);
  if (!std::filesystem::is_directory(c.quiz_dir)) bad("quiz_dir", "not a directory");
  c.pseudonym_key_file = existing_path(doc, "pseudonym_key_file", base);
  if (!doc.contains("log") || !doc["log"].is_string()) bad("log", "required path");
  c.log = base / doc["log"].get<std::string>();

  if (doc.contains("thresholds")) c.thresholds = thresholds_from_json(doc["thresholds"]);
  if (doc.contains("reminder")) {
    const auto& r = doc["reminder"];
    if (!r.is_object()) bad("reminder", "must be an object");
    if (r.contains("interval_hours")) {
      c.reminders.interval = std::chrono::hours(positive_integer(r["interval_hours"], "reminder.interval_hours"));
    }
    if (r.contains("cap")) c.reminders.cap = static_cast<int>(positive_integer(r["cap"], "reminder.cap"));
    if (r.contains("tick_seconds")) {
      const auto& t = r["tick_seconds"];
      if (!t.is_number_unsigned()) bad("reminder.tick_seconds", "must be a non-negative integer");
      c.reminder_tick = std::chrono::seconds(t.get<std::int64_t>());
    }
  }
  if (doc.contains("closure_depth")) {
    try {
      c.progression.depth = depth_from_string(doc["closure_depth"].get<std::string>());
    } catch (const std::exception& e) {
      bad("closure_depth", e.what());
    }
  }
  if (doc.contains("max_attempts")) {
    c.progression.max_attempts = static_cast<int>(positive_integer(doc["max_attempts"], "max_attempts"));
  }
  if (doc.contains("listen")) {
    const auto& l = doc["listen"];
    if (!l.is_object()) bad("listen", "must be an object");
    if (l.contains("host")) c.host = l["host"].get<std::string>();
    if (l.contains("port")) {
      if (!l["port"].is_number_unsigned() || l["port"].get<int>() > 65535) bad("listen.port", "must be 0..65535");
      c.port = l["port"].get<int>();
    }
  }
  if (doc.contains("durability")) {
    const auto d = doc["durability"].get<std::string>();
    if (d == "fsync") {
      c.durability = Durability::fsync;
    } else if (d == "buffered") {
      c.durability = Durability::buffered;
    } else {
      bad("durability", "must be fsync or buffered");
    }
  }
  return c;
}

DeploymentConfig load_config(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return config_from_json(doc, path.parent_path());
  } catch (const Json::exception& e) {
    throw CodecError(path.string() + ": " + e.what());
  }
}

}  // namespace microlearn
