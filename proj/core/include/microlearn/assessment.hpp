#pragma once

// Category-tagged multiple-choice quizzes, exact-match grading with weighted
// aggregation, and the three-band classification.

#include "microlearn/rational.hpp"
#include "microlearn/time.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace microlearn {

enum class QuizKind { initial, follow_up, micro_test };

/// Ordered: Fail < PassWithRemediation < Pass.
enum class Classification { Fail = 0, PassWithRemediation = 1, Pass = 2 };

std::string_view to_string(QuizKind kind);
std::string_view to_string(Classification band);
QuizKind quiz_kind_from_string(std::string_view text);            // throws std::invalid_argument
Classification classification_from_string(std::string_view text);  // throws std::invalid_argument

/// Bands are [0, min), [min, max), [max, 1].
struct Thresholds {
  Rational min{1, 2};
  Rational max{4, 5};

  bool valid() const { return Rational(0) <= min && min < max && max <= Rational(1); }
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

/// Deployment default, not a property of any particular course.
inline const Thresholds kDefaultThresholds{Rational(1, 2), Rational(4, 5)};

using ChoiceSet = std::set<std::size_t>;

struct Question {
  std::string id;
  std::string stem;
  std::vector<std::string> choices;
  ChoiceSet correct;
  std::string concept_id;
  Rational weight{1};
};

struct Quiz {
  std::string id;
  QuizKind kind = QuizKind::initial;
  std::vector<Question> questions;
  Thresholds thresholds = kDefaultThresholds;

  const Question* find_question(std::string_view question_id) const;
};

struct Submission {
  std::string learner;
  std::string quiz_id;
  std::map<std::string, ChoiceSet> answers;
  Timestamp submitted_at{};
};

struct CategoryScore {
  std::string concept_id;
  Rational weight{0};  // total question weight in this category
  Rational earned{0};  // weight of correctly answered questions

  Rational subscore() const { return weight == Rational(0) ? Rational(0) : earned / weight; }
  friend bool operator==(const CategoryScore&, const CategoryScore&) = default;
};

struct WrongAnswer {
  std::string question_id;
  std::string concept_id;
  friend bool operator==(const WrongAnswer&, const WrongAnswer&) = default;
};

struct GradeReport {
  std::string quiz_id;
  QuizKind quiz_kind = QuizKind::initial;
  std::string learner;
  Timestamp graded_at{};
  Rational score{0};
  std::vector<CategoryScore> per_category;  // first-appearance order in the quiz
  std::vector<WrongAnswer> wrong_answers;   // quiz question order
  Classification classification = Classification::Fail;
  Thresholds thresholds = kDefaultThresholds;

  friend bool operator==(const GradeReport&, const GradeReport&) = default;
};

class AssessmentError : public std::runtime_error {
 public:
  enum class Code { invalid_thresholds, invalid_quiz, quiz_mismatch, unknown_question, invalid_choice };
  AssessmentError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Throws AssessmentError{invalid_thresholds} unless 0 <= min < max <= 1.
Classification classify(const Rational& score, const Thresholds& thresholds);

/// Structural checks: ids, >= 2 choices, non-empty in-range answer keys,
/// positive weights, valid thresholds. Throws AssessmentError{invalid_quiz}.
void validate_quiz(const Quiz& quiz);

/// Exact-match scoring; unanswered questions count as wrong.
GradeReport grade(const Quiz& quiz, const Submission& submission);

/// Random question sampling: k of n questions chosen by seed, kept in quiz
/// order. k >= n returns the quiz unchanged.
Quiz sample_questions(const Quiz& quiz, std::size_t k, std::uint64_t seed);

}  // namespace microlearn
