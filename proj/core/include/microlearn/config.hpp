#pragma once

#include "microlearn/assessment.hpp"
#include "microlearn/event_log.hpp"
#include "microlearn/progression.hpp"
#include "microlearn/recommender.hpp"

#include <chrono>
#include <filesystem>
#include <string>

namespace microlearn {

/// Service deployment settings. Relative paths resolve against the directory
/// of the config file.
struct DeploymentConfig {
  std::filesystem::path graph;
  std::filesystem::path quiz_dir;  // every *.json inside is a quiz
  Thresholds thresholds = kDefaultThresholds;  // for quizzes that carry none
  ReminderPolicy reminders;
  ProgressionPolicy progression;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path log;
  Durability durability = Durability::fsync;
  std::filesystem::path pseudonym_key_file;
  std::chrono::seconds reminder_tick{60};  // 0 disables the background firing loop
};

/// Parses and checks the config: every referenced file must exist. Throws
/// CodecError naming the offending field.
DeploymentConfig load_config(const std::filesystem::path& path);
DeploymentConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir);

}  // namespace microlearn
