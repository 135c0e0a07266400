#include "microlearn/simulator.hpp"

#include "microlearn/codec.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace microlearn::sim {

namespace {

constexpr std::size_t kMaxSubsetChoices = 20;

bool multi_answer(const Question& q) { return q.correct.size() > 1; }

std::uint64_t mask_of(const ChoiceSet& set) {
  std::uint64_t mask = 0;
  for (auto c : set) mask |= std::uint64_t{1} << c;
  return mask;
}

ChoiceSet set_of(std::uint64_t mask) {
  ChoiceSet out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1) out.insert(i);
  }
  return out;
}

double clamp01(double m) { return m < 0 ? 0 : (m > 1 ? 1 : m); }

}  // namespace

double chance_level(const Question& question) {
  const auto n = question.choices.size();
  if (!multi_answer(question)) return 1.0 / static_cast<double>(n);
  if (n > kMaxSubsetChoices) throw std::invalid_argument("multi-answer question has too many choices to simulate");
  return 1.0 / static_cast<double>((std::uint64_t{1} << n) - 1);
}

double correct_probability(const SimulatedLearner& learner, const Question& question) {
  const auto it = learner.mastery.find(question.concept_id);
  if (it == learner.mastery.end()) {
    throw std::invalid_argument("learner " + learner.id + " has no mastery level for concept " + question.concept_id);
  }
  const double g = learner.guess_rate.value_or(chance_level(question));
  return g + (1 - g) * it->second;
}

ChoiceSet answer(const SimulatedLearner& learner, const Question& question, Rng& rng) {
  if (rng.bernoulli(correct_probability(learner, question))) return question.correct;
  const auto n = question.choices.size();
  if (!multi_answer(question)) {
    // One of the n - 1 other single choices.
    auto pick = static_cast<std::size_t>(rng.uniform_index(n - 1));
    if (pick >= *question.correct.begin()) ++pick;
    return {pick};
  }
  // One of the 2^n - 2 non-empty subsets other than the key.
  const auto key = mask_of(question.correct);
  auto mask = rng.uniform_index((std::uint64_t{1} << n) - 2) + 1;
  if (mask >= key) ++mask;
  return set_of(mask);
}

SimulatedLearner study(SimulatedLearner learner, const MicrolearningUnit& unit, double delta) {
  for (const auto& c : unit.covers) {
    auto& m = learner.mastery[c];
    m = m + delta * (1 - m);
  }
  return learner;
}

void validate_scenario(const Scenario& s) {
  auto check_range = [](const MasteryRange& r, const std::string& what) {
    if (!(r.low >= 0 && r.high <= 1 && r.low <= r.high)) {
      throw std::invalid_argument(what + ": mastery range must satisfy 0 <= low <= high <= 1");
    }
  };
  if (s.cohort_size == 0) throw std::invalid_argument("cohort_size must be positive");
  check_range(s.mastery.all, "mastery");
  for (const auto& [c, r] : s.mastery.per_concept) {
    if (!s.graph.has_concept(c)) throw std::invalid_argument("mastery override for unknown concept " + c);
    check_range(r, "mastery." + c);
  }
  if (!(s.learning_gain >= 0 && s.learning_gain <= 1)) throw std::invalid_argument("learning_gain must be in [0, 1]");
  if (s.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (s.guess_rate && !(*s.guess_rate >= 0 && *s.guess_rate <= 1)) {
    throw std::invalid_argument("guess_rate must be in [0, 1]");
  }
  if (s.policy.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  for (const Quiz* q : {&s.quiz, &s.follow_up}) {
    validate_quiz(*q);
    for (const auto& question : q->questions) {
      if (!s.graph.has_concept(question.concept_id)) {
        throw std::invalid_argument("quiz " + q->id + " question " + question.id + " names unknown concept " +
                                    question.concept_id);
      }
      (void)chance_level(question);
    }
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_object()) throw CodecError(path.string() + ": scenario must be an object");
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { return base / p; };
  auto get_path = [&](const char* key) -> std::filesystem::path {
    if (!doc.contains(key) || !doc[key].is_string()) throw CodecError(path.string() + ": missing '" + key + "' path");
    auto p = resolve(doc[key].get<std::string>());
    if (!std::filesystem::exists(p)) throw CodecError(path.string() + ": " + key + " file not found: " + p.string());
    return p;
  };
  auto number = [&](const Json& v, const std::string& what) {
    if (!v.is_number()) throw CodecError(path.string() + ": " + what + " must be a number");
    return v.get<double>();
  };
  auto range_from = [&](const Json& v, const std::string& what) {
    MasteryRange r;
    if (v.is_number()) {
      r.low = r.high = v.get<double>();
    } else if (v.is_object()) {
      if (v.contains("value")) {
        r.low = r.high = number(v["value"], what + ".value");
      } else {
        r.low = number(v.value("low", Json(0.0)), what + ".low");
        r.high = number(v.value("high", Json(1.0)), what + ".high");
      }
    } else {
      throw CodecError(path.string() + ": " + what + " must be a number or {low, high}");
    }
    return r;
  };

  Scenario s;
  s.name = doc.value("name", path.stem().string());
  const auto graph_path = get_path("graph");
  s.graph = parse_mindmap(read_text_file(graph_path));

  std::optional<Thresholds> thresholds;
  if (doc.contains("thresholds")) thresholds = thresholds_from_json(doc["thresholds"]);
  s.quiz = quiz_from_json(read_json_file(get_path("quiz")));
  s.follow_up = doc.contains("follow_up_quiz") ? quiz_from_json(read_json_file(get_path("follow_up_quiz"))) : s.quiz;
  if (thresholds) s.quiz.thresholds = s.follow_up.thresholds = *thresholds;

  const auto& size = doc.value("cohort_size", Json(0));
  if (!size.is_number_unsigned()) throw CodecError(path.string() + ": cohort_size must be a non-negative integer");
  s.cohort_size = size.get<std::size_t>();
  if (doc.contains("mastery")) {
    const auto& m = doc["mastery"];
    s.mastery.all = range_from(m, "mastery");
    if (m.is_object() && m.contains("per_concept")) {
      for (const auto& [c, v] : m["per_concept"].items()) s.mastery.per_concept[c] = range_from(v, "mastery." + c);
    }
  }
  if (doc.contains("learning_gain")) s.learning_gain = number(doc["learning_gain"], "learning_gain");
  if (doc.contains("max_iterations")) s.max_iterations = static_cast<int>(number(doc["max_iterations"], "max_iterations"));
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw CodecError(path.string() + ": seed must be a non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("closure_depth")) s.policy.depth = depth_from_string(doc["closure_depth"].get<std::string>());
  if (doc.contains("max_attempts")) s.policy.max_attempts = static_cast<int>(number(doc["max_attempts"], "max_attempts"));
  if (doc.contains("guess_rate") && !doc["guess_rate"].is_null()) s.guess_rate = number(doc["guess_rate"], "guess_rate");
  try {
    validate_scenario(s);
  } catch (const std::invalid_argument& e) {
    throw CodecError(path.string() + ": " + e.what());
  }
  return s;
}

namespace {

struct Cohort {
  const Scenario& scenario;
  CohortRun run;
  std::vector<Rng> rngs;
  std::vector<Rational> latest_score;
  std::vector<Classification> latest_band;
  std::vector<int> recommendations_issued;

  Timestamp clock(int iteration) const {
    // One week per round; a fixed epoch keeps the event stream reproducible.
    return parse_timestamp("2026-01-05T09:00:00Z") + std::chrono::days(7) * iteration;
  }

  void apply(std::size_t i, ProgressEvent event) {
    auto t = apply_event(run.final_states[i], event, scenario.graph, scenario.policy);
    for (const auto& effect : t.effects) {
      if (std::holds_alternative<IssueRecommendation>(effect)) {
        ++recommendations_issued[i];
        ++run.metrics.recommendations;
      } else if (std::holds_alternative<FlagForIntervention>(effect)) {
        ++run.metrics.interventions;
      }
    }
    run.final_states[i] = std::move(t.state);
    run.events[i].push_back(std::move(event));
  }

  GradeReport evaluate(std::size_t i, const Quiz& quiz, int iteration, IterationMetrics& m) {
    const auto& learner = run.final_learners[i];
    Submission sub;
    sub.learner = learner.id;
    sub.quiz_id = quiz.id;
    sub.submitted_at = clock(iteration);
    EvaluationTrace trace;
    trace.iteration = iteration;
    trace.learner = i;
    for (const auto& q : quiz.questions) {
      const double p = correct_probability(learner, q);
      auto chosen = answer(learner, q, rngs[i]);
      const bool ok = chosen == q.correct;
      sub.answers[q.id] = std::move(chosen);
      trace.probabilities.push_back(p);
      trace.correct.push_back(ok);
      ++m.answered;
      m.correct += ok ? 1 : 0;
      m.expected_correct += p;
      m.variance += p * (1 - p);
    }
    auto report = grade(quiz, sub);
    trace.score = report.score;
    run.evaluations.push_back(std::move(trace));

    ++m.evaluated;
    m.mean_score_evaluated += report.score;
    switch (report.classification) {
      case Classification::Fail: ++m.fail; break;
      case Classification::PassWithRemediation: ++m.pass_with_remediation; break;
      case Classification::Pass: ++m.pass; break;
    }
    latest_score[i] = report.score;
    latest_band[i] = report.classification;
    return report;
  }

  void close_iteration(IterationMetrics& m) {
    if (m.evaluated > 0) m.mean_score_evaluated /= static_cast<std::int64_t>(m.evaluated);
    Rational total{0};
    std::int64_t passing = 0;
    for (std::size_t i = 0; i < latest_score.size(); ++i) {
      total += latest_score[i];
      passing += latest_band[i] == Classification::Pass ? 1 : 0;
    }
    const auto n = static_cast<std::int64_t>(latest_score.size());
    m.cohort_mean_score = total / n;
    m.pass_fraction = Rational(passing, n);
    run.metrics.iterations.push_back(m);
  }
};

SimulatedLearner sample_learner(std::size_t index, const Scenario& s, Rng& rng) {
  SimulatedLearner l;
  l.id = "sim-" + std::to_string(index + 1);
  l.guess_rate = s.guess_rate;
  for (const auto& c : s.graph.concepts()) {
    auto it = s.mastery.per_concept.find(c.id);
    const auto& r = it == s.mastery.per_concept.end() ? s.mastery.all : it->second;
    l.mastery[c.id] = r.low == r.high ? r.low : clamp01(rng.uniform(r.low, r.high));
  }
  return l;
}

}  // namespace

CohortRun run_cohort(const Scenario& scenario) {
  validate_scenario(scenario);
  Cohort cohort{scenario, {}, {}, {}, {}, {}};
  auto& run = cohort.run;
  run.metrics.scenario = scenario.name;
  run.metrics.cohort_size = scenario.cohort_size;
  run.metrics.seed = scenario.seed;
  run.metrics.learning_gain = scenario.learning_gain;
  const auto n = scenario.cohort_size;
  if (n == 0) return run;

  // Each learner owns a stream seeded from the master stream, so one learner's
  // draws never depend on how many another one made.
  Rng master(scenario.seed);
  for (std::size_t i = 0; i < n; ++i) {
    cohort.rngs.emplace_back(master.next_u64());
    run.initial_learners.push_back(sample_learner(i, scenario, cohort.rngs.back()));
    LearnerState state;
    state.learner = run.initial_learners.back().id;
    run.final_states.push_back(std::move(state));
  }
  run.final_learners = run.initial_learners;
  run.events.resize(n);
  cohort.latest_score.assign(n, Rational(0));
  cohort.latest_band.assign(n, Classification::Fail);
  cohort.recommendations_issued.assign(n, 0);

  IterationMetrics initial;
  for (std::size_t i = 0; i < n; ++i) {
    auto report = cohort.evaluate(i, scenario.quiz, 0, initial);
    cohort.apply(i, ProgressEvent{cohort.clock(0), InitialResult{std::move(report)}});
  }
  cohort.close_iteration(initial);

  auto in_loop = [](const LearnerState& s) {
    return s.stage == LearnerStage::Remediating || s.stage == LearnerStage::AwaitingFollowUp;
  };
  for (int k = 1; k <= scenario.max_iterations; ++k) {
    bool any = false;
    for (const auto& s : run.final_states) any = any || in_loop(s);
    if (!any) break;

    IterationMetrics m;
    m.iteration = k;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_loop(run.final_states[i])) continue;
      const auto at = cohort.clock(k);
      const auto assigned = run.final_states[i].assigned_units;
      for (const auto& unit_id : assigned) {
        run.final_learners[i] = study(std::move(run.final_learners[i]), *scenario.graph.find_unit(unit_id),
                                      scenario.learning_gain);
        cohort.apply(i, ProgressEvent{at, UnitCompleted{unit_id}});
      }
      auto report = cohort.evaluate(i, scenario.follow_up, k, m);
      cohort.apply(i, ProgressEvent{at, FollowUpResult{std::move(report)}});
    }
    cohort.close_iteration(m);
  }

  for (const auto& s : run.final_states) {
    ++run.metrics.attempts_histogram[s.attempt_count];
    ++run.metrics.final_states[std::string(to_string(s.stage))];
  }
  return run;
}

Json metrics_to_json(const CohortMetrics& metrics) {
  Json out = Json::object();
  out["scenario"] = metrics.scenario;
  out["cohort_size"] = metrics.cohort_size;
  out["seed"] = metrics.seed;
  out["learning_gain"] = metrics.learning_gain;
  Json iterations = Json::array();
  for (const auto& m : metrics.iterations) {
    Json j = Json::object();
    j["iteration"] = m.iteration;
    j["evaluated"] = m.evaluated;
    j["bands"] = Json{{"Fail", m.fail}, {"PassWithRemediation", m.pass_with_remediation}, {"Pass", m.pass}};
    j["mean_score_evaluated"] = to_double(m.mean_score_evaluated);
    j["cohort_mean_score"] = to_double(m.cohort_mean_score);
    j["cohort_mean_score_exact"] = to_string(m.cohort_mean_score);
    j["pass_fraction"] = to_double(m.pass_fraction);
    j["answered"] = m.answered;
    j["correct"] = m.correct;
    j["expected_correct"] = m.expected_correct;
    j["sd_correct"] = std::sqrt(m.variance);
    iterations.push_back(std::move(j));
  }
  out["iterations"] = std::move(iterations);
  Json hist = Json::object();
  for (const auto& [attempts, count] : metrics.attempts_histogram) hist[std::to_string(attempts)] = count;
  out["attempts_histogram"] = std::move(hist);
  Json states = Json::object();
  for (auto stage : kAllStages) {
    const std::string name(to_string(stage));
    auto it = metrics.final_states.find(name);
    states[name] = it == metrics.final_states.end() ? 0 : it->second;
  }
  out["final_states"] = std::move(states);
  out["interventions"] = metrics.interventions;
  out["recommendations"] = metrics.recommendations;
  return out;
}

std::string metrics_to_csv(const CohortMetrics& metrics) {
  std::ostringstream out;
  out << "iteration,evaluated,fail,pass_with_remediation,pass,mean_score_evaluated,cohort_mean_score,"
         "pass_fraction,answered,correct,expected_correct,sd_correct\n";
  out.precision(17);
  for (const auto& m : metrics.iterations) {
    out << m.iteration << ',' << m.evaluated << ',' << m.fail << ',' << m.pass_with_remediation << ',' << m.pass
        << ',' << to_double(m.mean_score_evaluated) << ',' << to_double(m.cohort_mean_score) << ','
        << to_double(m.pass_fraction) << ',' << m.answered << ',' << m.correct << ',' << m.expected_correct << ','
        << std::sqrt(m.variance) << '\n';
  }
  return out.str();
}

}  // namespace microlearn::sim
