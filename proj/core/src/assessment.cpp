#include "microlearn/assessment.hpp"

#include "microlearn/random.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace microlearn {

std::string_view to_string(QuizKind kind) {
  switch (kind) {
    case QuizKind::initial: return "initial";
    case QuizKind::follow_up: return "follow_up";
    case QuizKind::micro_test: return "micro_test";
  }
  return "initial";
}

std::string_view to_string(Classification band) {
  switch (band) {
    case Classification::Fail: return "Fail";
    case Classification::PassWithRemediation: return "PassWithRemediation";
    case Classification::Pass: return "Pass";
  }
  return "Fail";
}

QuizKind quiz_kind_from_string(std::string_view text) {
  for (auto kind : {QuizKind::initial, QuizKind::follow_up, QuizKind::micro_test}) {
    if (text == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown quiz kind '" + std::string(text) + "'");
}

Classification classification_from_string(std::string_view text) {
  for (auto band : {Classification::Fail, Classification::PassWithRemediation, Classification::Pass}) {
    if (text == to_string(band)) return band;
  }
  throw std::invalid_argument("unknown classification '" + std::string(text) + "'");
}

const Question* Quiz::find_question(std::string_view question_id) const {
  auto it = std::find_if(questions.begin(), questions.end(), [&](const Question& q) { return q.id == question_id; });
  return it == questions.end() ? nullptr : &*it;
}

Classification classify(const Rational& score, const Thresholds& thresholds) {
  if (!thresholds.valid()) {
    throw AssessmentError(AssessmentError::Code::invalid_thresholds,
                          "thresholds must satisfy 0 <= min < max <= 1 (got " + to_string(thresholds.min) + ", " +
                              to_string(thresholds.max) + ")");
  }
  if (score < thresholds.min) return Classification::Fail;
  if (score < thresholds.max) return Classification::PassWithRemediation;
  return Classification::Pass;
}

void validate_quiz(const Quiz& quiz) {
  auto bad = [&](const std::string& message) {
    throw AssessmentError(AssessmentError::Code::invalid_quiz, "quiz '" + quiz.id + "': " + message);
  };
  if (quiz.id.empty()) bad("missing id");
  if (!quiz.thresholds.valid()) bad("thresholds must satisfy 0 <= min < max <= 1");
  if (quiz.questions.empty()) bad("no questions");
  std::unordered_set<std::string> ids;
  for (const auto& q : quiz.questions) {
    if (q.id.empty()) bad("question without id");
    if (!ids.insert(q.id).second) bad("duplicate question id '" + q.id + "'");
    if (q.choices.size() < 2) bad("question '" + q.id + "' needs at least two choices");
    if (q.correct.empty()) bad("question '" + q.id + "' has no correct choice");
    if (*q.correct.rbegin() >= q.choices.size()) bad("question '" + q.id + "' marks a non-existent choice correct");
    if (q.weight <= Rational(0)) bad("question '" + q.id + "' weight must be positive");
    if (q.concept_id.empty()) bad("question '" + q.id + "' has no concept");
  }
}

GradeReport grade(const Quiz& quiz, const Submission& submission) {
  if (submission.quiz_id != quiz.id) {
    throw AssessmentError(AssessmentError::Code::quiz_mismatch,
                          "submission is for quiz '" + submission.quiz_id + "', not '" + quiz.id + "'");
  }
  for (const auto& [question_id, chosen] : submission.answers) {
    const auto* q = quiz.find_question(question_id);
    if (!q) {
      throw AssessmentError(AssessmentError::Code::unknown_question,
                            "quiz '" + quiz.id + "' has no question '" + question_id + "'");
    }
    if (!chosen.empty() && *chosen.rbegin() >= q->choices.size()) {
      throw AssessmentError(AssessmentError::Code::invalid_choice,
                            "question '" + question_id + "' has no choice " + std::to_string(*chosen.rbegin()));
    }
  }

  GradeReport report;
  report.quiz_id = quiz.id;
  report.quiz_kind = quiz.kind;
  report.learner = submission.learner;
  report.graded_at = submission.submitted_at;
  report.thresholds = quiz.thresholds;

  std::unordered_map<std::string, std::size_t> category_slot;
  Rational total_weight{0};
  Rational earned{0};
  for (const auto& q : quiz.questions) {
    auto [slot, fresh] = category_slot.emplace(q.concept_id, report.per_category.size());
    if (fresh) report.per_category.push_back(CategoryScore{q.concept_id, Rational(0), Rational(0)});
    auto& category = report.per_category[slot->second];

    const auto answer = submission.answers.find(q.id);
    const bool correct = answer != submission.answers.end() && answer->second == q.correct;
    total_weight += q.weight;
    category.weight += q.weight;
    if (correct) {
      earned += q.weight;
      category.earned += q.weight;
    } else {
      report.wrong_answers.push_back(WrongAnswer{q.id, q.concept_id});
    }
  }
  report.score = total_weight == Rational(0) ? Rational(0) : earned / total_weight;
  report.classification = classify(report.score, quiz.thresholds);
  return report;
}

Quiz sample_questions(const Quiz& quiz, std::size_t k, std::uint64_t seed) {
  if (k >= quiz.questions.size()) return quiz;
  Rng rng(seed);
  std::vector<std::size_t> order(quiz.questions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots hold the sample.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  Quiz sampled = quiz;
  sampled.questions.clear();
  for (auto i : order) sampled.questions.push_back(quiz.questions[i]);
  return sampled;
}

}  // namespace microlearn
