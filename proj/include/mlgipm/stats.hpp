// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

namespace mlgipm::stats {

/// Wilcoxon–Mann–Whitney rank sum. U uses midranks for ties. The p-value is
/// two-sided: exact permutation enumeration when min(len) < 8 (and the
/// combination count is tractable), otherwise the tie-corrected normal
/// approximation with continuity correction.
struct RankSumResult {
  double u = 0.0;  ///< U statistic of the first sample
  double z = 0.0;  ///< normal-approximation z score (reported in both regimes)
  double p = 1.0;
  bool exact = false;
};
RankSumResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b);

/// Pooled two-proportion Z test; degenerate (pooled rate 0 or 1) reports z=0.
struct ProportionZResult {
  double z = 0.0;
  double p = 1.0;
  bool degenerate = false;
};
ProportionZResult two_proportion_z(int successes1, int total1, int successes2, int total2);

/// Pearson chi-square (no continuity correction) and Cramer's V = sqrt(chi2/N)
/// for a 2x2 table; a zero marginal makes the statistic undefined.
struct ChiSquareResult {
  double chi2 = 0.0;
  double v = 0.0;
  bool undefined = false;
};
ChiSquareResult chi_square_cramers_v(const std::array<std::array<double, 2>, 2>& table);

/// Cohen's d with the unbiased pooled standard deviation; undefined when the
/// pooled SD vanishes.
struct CohensDResult {
  double d = 0.0;
  bool undefined = false;
};
CohensDResult cohens_d(const std::vector<double>& a, const std::vector<double>& b);

/// Standard normal CDF (used by the tests' closed-form oracles too).
double normal_cdf(double x);

// Small sample helpers shared with the benchmark harness.
double median(std::vector<double> values);                // empty -> 0
double mean(const std::vector<double>& values);           // empty -> 0
double sample_sd(const std::vector<double>& values);      // n < 2 -> 0, unbiased

}  // namespace mlgipm::stats
