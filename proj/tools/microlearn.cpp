// microlearn: command-line front end. Exit status 0 on success, 1 when the
// input is invalid (diagnostics on stderr), 2 on usage errors.

#include "microlearn/analytics.hpp"
#include "microlearn/codec.hpp"
#include "microlearn/config.hpp"
#include "microlearn/http_server.hpp"
#include "microlearn/learning_service.hpp"
#include "microlearn/pseudonym.hpp"
#include "microlearn/simulator.hpp"

#include <CLI11.hpp>

#include <condition_variable>
#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

using namespace microlearn;

namespace {

std::string plural(std::size_t n, const char* word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

int cmd_validate(const std::string& path, bool as_json) {
  const auto text = read_text_file(path);
  std::vector<Finding> findings;
  try {
    findings = validate(parse_declarations(text));
  } catch (const GraphError& e) {
    findings.push_back(e.finding());
  }
  std::size_t errors = 0;
  for (const auto& f : findings) errors += f.severity == Severity::error ? 1 : 0;
  const auto warnings = findings.size() - errors;
  if (as_json) {
    Json out = Json::object();
    out["errors"] = errors;
    out["warnings"] = warnings;
    out["findings"] = Json::array();
    for (const auto& f : findings) out["findings"].push_back(to_json(f));
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& f : findings) (f.severity == Severity::error ? std::cerr : std::cout) << format_finding(f, path) << '\n';
    std::cout << plural(errors, "error") << ", " << plural(warnings, "warning") << '\n';
  }
  return errors == 0 ? 0 : 1;
}

int cmd_grade(const std::string& quiz_path, const std::string& submission_path, bool as_json) {
  const auto quiz = quiz_from_json(read_json_file(quiz_path));
  const auto submission = submission_from_json(read_json_file(submission_path));
  const auto report = grade(quiz, submission);
  if (as_json) {
    std::cout << to_json(report).dump(2) << '\n';
    return 0;
  }
  std::cout << "score: " << to_string(report.score) << " (" << to_double(report.score) << ")\n"
            << "classification: " << to_string(report.classification) << '\n';
  for (const auto& c : report.per_category) {
    std::cout << "  " << c.concept_id << ": " << to_string(c.earned) << " of " << to_string(c.weight) << '\n';
  }
  for (const auto& w : report.wrong_answers) std::cout << "wrong: " << w.question_id << " (" << w.concept_id << ")\n";
  return 0;
}

int cmd_recommend(const std::string& report_path, const std::string& graph_path, const std::string& depth,
                  const std::string& origin) {
  const auto graph = parse_mindmap(read_text_file(graph_path));
  const auto report = grade_report_from_json(read_json_file(report_path));
  const auto rec = recommend(report, graph, origin_from_string(origin), depth_from_string(depth));
  auto out = to_json(rec);
  out["unit_details"] = Json::array();
  for (const auto& id : rec.units) out["unit_details"].push_back(to_json(*graph.find_unit(id)));
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path, const std::string& csv_path) {
  const auto scenario = sim::load_scenario(scenario_path);
  const auto run = sim::run_cohort(scenario);
  const auto json = sim::metrics_to_json(run.metrics).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << json;
  } else {
    write_file(out_path, json);
  }
  if (!csv_path.empty()) write_file(csv_path, sim::metrics_to_csv(run.metrics));
  return 0;
}

std::vector<EventRecord> load_log(const std::string& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("event log not found: " + path);
  EventLog log(path, Durability::buffered);
  if (log.open_report().quarantined) {
    std::cerr << "warning: torn final line moved to " << log.open_report().quarantine_path.string() << '\n';
  }
  return log.snapshot();
}

std::optional<Timestamp> optional_time(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_timestamp(text);
}

int cmd_report(const std::string& which, const std::string& log_path, const std::string& from, const std::string& to,
               const std::string& scores_path) {
  Json out = Json::array();
  if (which == "demand") {
    for (const auto& e : demand_report(load_log(log_path), TimeWindow{optional_time(from), optional_time(to)})) {
      out.push_back(to_json(e));
    }
  } else if (which == "quality") {
    for (const auto& e : quality_report(load_log(log_path))) out.push_back(to_json(e));
  } else {
    const auto doc = read_json_file(scores_path);
    auto list = [&](const char* key) {
      std::vector<Rational> v;
      const auto& arr = doc.at(key);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        v.push_back(rational_from_json(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
      }
      return v;
    };
    out = to_json(stats::cohort_compare(list("a"), list("b")));
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_serve(const std::string& config_path) {
  const auto config = load_config(config_path);
  SystemClock clock;
  auto service = LearningService::open(config, clock);
  if (const auto& r = service->log().open_report(); r.quarantined) {
    std::cerr << "warning: torn final log line moved to " << r.quarantine_path.string() << '\n';
  }

  // Shutdown signals are taken synchronously by a dedicated thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(*service);
  const int port = server.bind(config.host, config.port);
  if (port < 0) {
    std::cerr << "error: cannot bind " << config.host << ":" << config.port << '\n';
    return 1;
  }
  std::cerr << "listening on http://" << config.host << ":" << port << "/v1 (" << service->log().size()
            << " events in " << config.log.string() << ")\n";

  std::jthread ticker;
  if (config.reminder_tick.count() > 0) {
    ticker = std::jthread([&](std::stop_token stop) {
      std::mutex m;
      std::condition_variable_any cv;
      while (!stop.stop_requested()) {
        std::unique_lock lock(m);
        cv.wait_for(lock, stop, config.reminder_tick, [] { return false; });
        if (stop.stop_requested()) break;
        try {
          service->fire_due_reminders();
        } catch (const std::exception& e) {
          std::cerr << "reminder tick failed: " << e.what() << '\n';
        }
      }
    });
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  if (ticker.joinable()) {
    ticker.request_stop();
    ticker.join();
  }
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << "stopped; " << service->log().size() << " events\n";
  return 0;
}

int cmd_pseudonym(const std::string& key_file, const std::vector<std::string>& identities) {
  const auto p = Pseudonymizer::from_key_file(key_file);
  for (const auto& id : identities) std::cout << p.pseudonym(id) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive microlearning: mind maps, grading, recommendations, simulation and the /v1 service"};
  app.require_subcommand(1);

  bool json = false;
  std::string path, quiz, submission, graph, depth = "direct", origin = "initial_fail", out, csv, which, log, from,
                                                                   to, scores, key_file;
  std::vector<std::string> identities;

  auto* validate_cmd = app.add_subcommand("validate", "Check a mind-map file");
  validate_cmd->add_option("graph", path, "Mind-map file")->required();
  validate_cmd->add_flag("--json", json, "Emit findings as JSON");

  auto* grade_cmd = app.add_subcommand("grade", "Grade a submission");
  grade_cmd->add_option("quiz", quiz, "Quiz file")->required();
  grade_cmd->add_option("submission", submission, "Submission file")->required();
  grade_cmd->add_flag("--json", json, "Emit the full grade report as JSON");

  auto* recommend_cmd = app.add_subcommand("recommend", "Recommend units for a grade report");
  recommend_cmd->add_option("report", path, "Grade report (from grade --json)")->required();
  recommend_cmd->add_option("--graph", graph, "Mind-map file")->required();
  recommend_cmd->add_option("--depth", depth, "direct or with_prerequisites")
      ->check(CLI::IsMember({"direct", "with_prerequisites"}));
  recommend_cmd->add_option("--origin", origin, "initial_fail, followup_fail or followup_remediation")
      ->check(CLI::IsMember({"initial_fail", "followup_fail", "followup_remediation"}));

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a synthetic cohort scenario");
  simulate_cmd->add_option("scenario", path, "Scenario file")->required();
  simulate_cmd->add_option("--out", out, "Write metrics JSON here instead of stdout");
  simulate_cmd->add_option("--csv", csv, "Also write per-iteration metrics as CSV");

  auto* report_cmd = app.add_subcommand("report", "Demand, quality or cohort report");
  report_cmd->add_option("kind", which, "demand, quality or cohort")
      ->required()
      ->check(CLI::IsMember({"demand", "quality", "cohort"}));
  report_cmd->add_option("--log", log, "Event log (demand, quality)");
  report_cmd->add_option("--from", from, "Window start, inclusive (demand)");
  report_cmd->add_option("--to", to, "Window end, exclusive (demand)");
  report_cmd->add_option("--scores", scores, "JSON file {\"a\": [...], \"b\": [...]} (cohort)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("config", path, "Deployment config")->required();

  auto* pseudonym_cmd = app.add_subcommand("pseudonym", "Print the pseudonyms of identities");
  pseudonym_cmd->add_option("--key-file", key_file, "Deployment key file")->required();
  pseudonym_cmd->add_option("identity", identities, "Identities")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) return cmd_validate(path, json);
    if (*grade_cmd) return cmd_grade(quiz, submission, json);
    if (*recommend_cmd) return cmd_recommend(path, graph, depth, origin);
    if (*simulate_cmd) return cmd_simulate(path, out, csv);
    if (*report_cmd) {
      if (which == "cohort" ? scores.empty() : log.empty()) {
        std::cerr << "error: report " << which << " needs " << (which == "cohort" ? "--scores" : "--log") << '\n';
        return 2;
      }
      return cmd_report(which, log, from, to, scores);
    }
    if (*serve_cmd) return cmd_serve(path);
    if (*pseudonym_cmd) return cmd_pseudonym(key_file, identities);
  } catch (const GraphError& e) {
    std::cerr << format_finding(e.finding(), graph.empty() ? path : graph) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
