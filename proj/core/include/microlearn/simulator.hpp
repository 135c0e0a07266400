#pragma once

// Seeded synthetic cohorts driven through the real assessment, recommender and
// progression modules. Learner model: a question on concept c is answered
// correctly with probability g + (1 - g) * m[c]; studying a unit moves each
// covered concept to m + delta * (1 - m).

#include "microlearn/assessment.hpp"
#include "microlearn/event_log.hpp"
#include "microlearn/knowledge_graph.hpp"
#include "microlearn/progression.hpp"
#include "microlearn/random.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace microlearn::sim {

struct SimulatedLearner {
  std::string id;
  std::map<std::string, double> mastery;  // levels in [0, 1]
  std::optional<double> guess_rate;       // unset: chance level of each question
};

/// Chance of hitting the answer key by uniform guessing: 1/n for single-answer
/// questions, 1/(2^n - 1) over non-empty subsets for multi-answer ones.
double chance_level(const Question& question);

/// g + (1 - g) * m for this learner and question.
double correct_probability(const SimulatedLearner& learner, const Question& question);

/// The key with probability correct_probability, otherwise a uniformly chosen
/// wrong choice set of the same arity class (single choices for single-answer
/// questions, other non-empty subsets for multi-answer ones).
ChoiceSet answer(const SimulatedLearner& learner, const Question& question, Rng& rng);

/// m' = m + delta * (1 - m) for every concept the unit covers.
SimulatedLearner study(SimulatedLearner learner, const MicrolearningUnit& unit, double delta);

struct MasteryRange {
  double low = 0.0;
  double high = 1.0;
};

struct MasteryDistribution {
  MasteryRange all;                               // uniform on [low, high); low == high is a fixed level
  std::map<std::string, MasteryRange> per_concept;  // overrides
};

struct Scenario {
  std::string name;
  ConceptGraph graph;
  Quiz quiz;       // initial evaluation
  Quiz follow_up;  // re-test in each remediation iteration
  std::size_t cohort_size = 0;
  MasteryDistribution mastery;
  double learning_gain = 0.5;  // delta in [0, 1]; 0 is the no-learning control
  int max_iterations = 5;
  std::uint64_t seed = 0;
  ProgressionPolicy policy;
  std::optional<double> guess_rate;
};

/// Throws std::invalid_argument for out-of-range parameters.
void validate_scenario(const Scenario& scenario);

/// Scenario file (JSON) whose graph and quiz paths are relative to it. Fields
/// "thresholds", when present, replace both quizzes' thresholds.
Scenario load_scenario(const std::filesystem::path& path);

/// Iteration 0 is the initial evaluation; iteration k >= 1 is the k-th
/// remediation round (study assigned units, then the follow-up quiz).
struct IterationMetrics {
  int iteration = 0;
  std::size_t evaluated = 0;
  std::size_t fail = 0;
  std::size_t pass_with_remediation = 0;
  std::size_t pass = 0;
  Rational mean_score_evaluated{0};
  Rational cohort_mean_score{0};  // every learner's latest score
  Rational pass_fraction{0};      // learners whose latest band is Pass
  std::size_t answered = 0;
  std::size_t correct = 0;
  double expected_correct = 0;  // sum of correct_probability over the answered questions
  double variance = 0;          // sum of p (1 - p)
};

/// One evaluation as seen by the learner model, for external checks.
struct EvaluationTrace {
  int iteration = 0;
  std::size_t learner = 0;
  std::vector<double> probabilities;  // per question, in quiz order
  std::vector<bool> correct;
  Rational score{0};
};

struct CohortMetrics {
  std::string scenario;
  std::size_t cohort_size = 0;
  std::uint64_t seed = 0;
  double learning_gain = 0;
  std::vector<IterationMetrics> iterations;
  std::map<int, std::size_t> attempts_histogram;       // follow-up attempts -> learners
  std::map<std::string, std::size_t> final_states;     // stage name -> learners
  std::size_t interventions = 0;
  std::size_t recommendations = 0;
};

struct CohortRun {
  CohortMetrics metrics;
  std::vector<SimulatedLearner> initial_learners;
  std::vector<SimulatedLearner> final_learners;
  std::vector<LearnerState> final_states;
  std::vector<std::vector<ProgressEvent>> events;  // per learner, in application order
  std::vector<EvaluationTrace> evaluations;
};

/// Deterministic in the scenario (seed included).
CohortRun run_cohort(const Scenario& scenario);

/// Byte-stable renderings of the metrics.
Json metrics_to_json(const CohortMetrics& metrics);
std::string metrics_to_csv(const CohortMetrics& metrics);

}  // namespace microlearn::sim
