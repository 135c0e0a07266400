#include "microlearn/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace microlearn::stats {

namespace {

struct Ranked {
  std::vector<std::int64_t> doubled_rank;  // pooled order, 2 * midrank
  std::vector<bool> in_b;
  std::vector<std::size_t> tie_sizes;
  std::int64_t doubled_rank_sum_b = 0;
};

Ranked rank_pooled(std::span<const Rational> a, std::span<const Rational> b) {
  std::vector<std::pair<Rational, bool>> pooled;
  pooled.reserve(a.size() + b.size());
  for (const auto& x : a) pooled.emplace_back(x, false);
  for (const auto& x : b) pooled.emplace_back(x, true);
  std::stable_sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  Ranked out;
  out.doubled_rank.resize(pooled.size());
  out.in_b.resize(pooled.size());
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    // 1-based ranks i+1 .. j+1 share the midrank ((i+1)+(j+1))/2.
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      out.doubled_rank[k] = doubled;
      out.in_b[k] = pooled[k].second;
      if (pooled[k].second) out.doubled_rank_sum_b += doubled;
    }
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

void require_nonempty(std::span<const Rational> a, std::span<const Rational> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("cohort comparison needs two non-empty groups");
}

// 2U for group b from its doubled rank sum.
std::int64_t doubled_u(std::int64_t doubled_rank_sum, std::int64_t n_b) {
  return doubled_rank_sum - n_b * (n_b + 1);
}

Rational mean(std::span<const Rational> xs) {
  Rational total{0};
  for (const auto& x : xs) total += x;
  return total / static_cast<std::int64_t>(xs.size());
}

}  // namespace

double mann_whitney_u(std::span<const Rational> a, std::span<const Rational> b) {
  require_nonempty(a, b);
  const auto ranked = rank_pooled(a, b);
  return static_cast<double>(doubled_u(ranked.doubled_rank_sum_b, static_cast<std::int64_t>(b.size()))) / 2.0;
}

double exact_two_sided_p(std::span<const Rational> a, std::span<const Rational> b) {
  require_nonempty(a, b);
  const auto ranked = rank_pooled(a, b);
  const std::size_t n = ranked.doubled_rank.size();
  const std::size_t n_b = b.size();
  std::int64_t max_sum = 0;
  for (auto r : ranked.doubled_rank) max_sum += r;

  // ways[k][s]: subsets of size k of the items seen so far with doubled rank sum s.
  std::vector<std::vector<double>> ways(n_b + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t item = 0; item < n; ++item) {
    const auto r = static_cast<std::size_t>(ranked.doubled_rank[item]);
    for (std::size_t k = std::min(item + 1, n_b); k >= 1; --k) {
      auto& row = ways[k];
      const auto& below = ways[k - 1];
      for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) {
        row[s] += below[s - r];
        if (s == r) break;
      }
    }
  }

  const auto nb = static_cast<std::int64_t>(n_b);
  const auto centre = static_cast<std::int64_t>(a.size()) * nb;  // 2 * E[U]
  const auto observed = std::llabs(doubled_u(ranked.doubled_rank_sum_b, nb) - centre);
  double extreme = 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < ways[n_b].size(); ++s) {
    const double count = ways[n_b][s];
    if (count == 0.0) continue;
    total += count;
    if (std::llabs(doubled_u(static_cast<std::int64_t>(s), nb) - centre) >= observed) extreme += count;
  }
  return std::min(1.0, extreme / total);
}

double normal_two_sided_p(std::span<const Rational> a, std::span<const Rational> b) {
  require_nonempty(a, b);
  const auto ranked = rank_pooled(a, b);
  const double n_a = static_cast<double>(a.size());
  const double n_b = static_cast<double>(b.size());
  const double n = n_a + n_b;
  const double u = static_cast<double>(doubled_u(ranked.doubled_rank_sum_b, static_cast<std::int64_t>(b.size()))) / 2.0;
  double tie_term = 0.0;
  for (auto t : ranked.tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double variance = n_a * n_b / 12.0 * ((n + 1.0) - (n > 1.0 ? tie_term / (n * (n - 1.0)) : 0.0));
  if (variance <= 0.0) return 1.0;
  const double deviation = std::max(0.0, std::abs(u - n_a * n_b / 2.0) - 0.5);
  const double z = deviation / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

CohortComparison cohort_compare(std::span<const Rational> a, std::span<const Rational> b) {
  require_nonempty(a, b);
  CohortComparison out;
  out.n_a = a.size();
  out.n_b = b.size();
  out.mean_diff = mean(b) - mean(a);
  out.u_statistic = mann_whitney_u(a, b);
  out.effect_size = 2.0 * out.u_statistic / (static_cast<double>(a.size()) * static_cast<double>(b.size())) - 1.0;
  if (a.size() <= kExactGroupLimit && b.size() <= kExactGroupLimit) {
    out.method = PValueMethod::exact;
    out.p_value = exact_two_sided_p(a, b);
  } else {
    out.method = PValueMethod::normal_approximation;
    out.p_value = normal_two_sided_p(a, b);
  }
  return out;
}

}  // namespace microlearn::stats
