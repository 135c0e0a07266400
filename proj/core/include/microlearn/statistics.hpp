#pragma once

// Two-sample comparison of cohort scores with the Mann-Whitney U test.

#include "microlearn/rational.hpp"

#include <cstddef>
#include <span>

namespace microlearn::stats {

enum class PValueMethod { exact, normal_approximation };

/// Groups up to this size (both) get the exact permutation p-value.
inline constexpr std::size_t kExactGroupLimit = 8;

struct CohortComparison {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  Rational mean_diff{0};   // mean(b) - mean(a), exact
  double u_statistic = 0;  // pairs with b > a, ties counted one half
  double effect_size = 0;  // rank-biserial correlation, in [-1, 1]; positive when b ranks higher
  double p_value = 1;      // two-sided
  PValueMethod method = PValueMethod::exact;
};

/// Throws std::invalid_argument when either group is empty.
CohortComparison cohort_compare(std::span<const Rational> a, std::span<const Rational> b);

/// U for group b (midranks for ties).
double mann_whitney_u(std::span<const Rational> a, std::span<const Rational> b);

/// Exact two-sided p-value from the permutation distribution of the doubled
/// rank sum, conditional on the observed ties: P(|U - n_a n_b / 2| >= observed).
double exact_two_sided_p(std::span<const Rational> a, std::span<const Rational> b);

/// Normal approximation with tie-corrected variance and 0.5 continuity correction.
double normal_two_sided_p(std::span<const Rational> a, std::span<const Rational> b);

}  // namespace microlearn::stats
