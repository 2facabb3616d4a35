// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "mlgipm/errors.hpp"

namespace mlgipm::stats {

namespace {

/// Midranks of the combined sample (1-based; ties share the average rank).
std::vector<double> midranks(const std::vector<double>& combined) {
  const std::size_t n = combined.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return combined[i] < combined[j]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && combined[order[j + 1]] == combined[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>((i + 1) + (j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

RankSumResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw DimensionError("wilcoxon_rank_sum: both samples must be nonempty");

  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> combined;
  combined.reserve(n);
  combined.insert(combined.end(), a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(combined);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];

  RankSumResult out;
  out.u = rank_sum_a - 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);

  // Tie-corrected normal approximation (always reported as z).
  const double mean_u = 0.5 * static_cast<double>(na) * static_cast<double>(nb);
  double tie_term = 0.0;
  {
    std::vector<double> sorted = combined;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double nn = static_cast<double>(n);
  const double var_u = (static_cast<double>(na) * static_cast<double>(nb) / 12.0) *
                       ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var_u > 0.0) {
    const double shift = out.u - mean_u;
    const double cc = shift > 0.0 ? -0.5 : (shift < 0.0 ? 0.5 : 0.0);
    out.z = (shift + cc) / std::sqrt(var_u);
  }

  const std::size_t smaller = std::min(na, nb);
  const bool small_sample = smaller < 8;
  const bool tractable = binomial(n, na) <= 2.0e6;
  if (small_sample && tractable) {
    // Exact permutation distribution of U over all assignments of the
    // combined (tied) sample; ranks are fixed, only the subset varies.
    std::vector<std::size_t> pick(na);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::uint64_t total = 0, at_most = 0, at_least = 0;
    const double offset = 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);
    while (true) {
      double rs = 0.0;
      for (std::size_t idx : pick) rs += ranks[idx];
      const double u_perm = rs - offset;
      ++total;
      if (u_perm <= out.u + 1e-12) ++at_most;
      if (u_perm >= out.u - 1e-12) ++at_least;

      // next combination
      std::size_t i = na;
      while (i > 0 && pick[i - 1] == n - na + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t k = i; k < na; ++k) pick[k] = pick[k - 1] + 1;
    }
    const double tail = static_cast<double>(std::min(at_most, at_least)) /
                        static_cast<double>(total);
    out.p = std::min(1.0, 2.0 * tail);
    out.exact = true;
  } else {
    out.p = var_u > 0.0 ? std::erfc(std::abs(out.z) / std::sqrt(2.0)) : 1.0;
    out.exact = false;
  }
  return out;
}

ProportionZResult two_proportion_z(int successes1, int total1, int successes2, int total2) {
  if (total1 < 1 || total2 < 1)
    throw DimensionError("two_proportion_z: sample sizes must be >= 1");
  if (successes1 < 0 || successes1 > total1 || successes2 < 0 || successes2 > total2)
    throw DomainError("two_proportion_z: success counts out of range");

  ProportionZResult out;
  const double p1 = static_cast<double>(successes1) / total1;
  const double p2 = static_cast<double>(successes2) / total2;
  const double pooled = static_cast<double>(successes1 + successes2) / (total1 + total2);
  const double spread = pooled * (1.0 - pooled);
  if (spread <= 0.0) {
    out.degenerate = true;
    out.z = 0.0;
    out.p = 1.0;
    return out;
  }
  out.z = (p1 - p2) / std::sqrt(spread * (1.0 / total1 + 1.0 / total2));
  out.p = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

ChiSquareResult chi_square_cramers_v(const std::array<std::array<double, 2>, 2>& table) {
  ChiSquareResult out;
  for (const auto& row : table)
    for (double v : row)
      if (v < 0.0) throw DomainError("chi_square_cramers_v: counts must be nonnegative");

  const double r0 = table[0][0] + table[0][1];
  const double r1 = table[1][0] + table[1][1];
  const double c0 = table[0][0] + table[1][0];
  const double c1 = table[0][1] + table[1][1];
  const double total = r0 + r1;
  if (total <= 0.0) throw DomainError("chi_square_cramers_v: empty table");
  if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) {
    out.undefined = true;
    return out;
  }

  const double rows[2] = {r0, r1};
  const double cols[2] = {c0, c1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      const double diff = table[i][j] - expected;
      out.chi2 += diff * diff / expected;
    }
  out.v = std::sqrt(out.chi2 / total);
  return out;
}

CohensDResult cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DimensionError("cohens_d: both samples need at least 2 values");

  CohensDResult out;
  const double ma = mean(a), mb = mean(b);
  const double va = sample_sd(a), vb = sample_sd(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled_var =
      ((na - 1.0) * va * va + (nb - 1.0) * vb * vb) / (na + nb - 2.0);
  if (pooled_var <= 0.0) {
    out.undefined = true;
    return out;
  }
  out.d = (ma - mb) / std::sqrt(pooled_var);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace mlgipm::stats
