// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mlgipm/solver.hpp"

namespace mlgipm::bench {

enum class Problem { P1, P2 };
enum class P1Norm { PaperExact, Squared };
enum class ReportFormat { Csv, Markdown, Json };

std::string to_string(Problem p);
std::string to_string(P1Norm v);
std::string to_string(ReportFormat f);
Problem parse_problem(std::string_view text);
P1Norm parse_p1_norm(std::string_view text);
ReportFormat parse_format(std::string_view text);

struct BenchmarkConfig {
  Problem problem = Problem::P1;
  int n = 3;
  int elements = 2;
  int trials = 100;
  std::uint64_t base_seed = 1;
  solver::SolverOptions solver;
  P1Norm p1_norm = P1Norm::PaperExact;
  int threads = 0;  ///< 0 = hardware concurrency
};

struct ProblemInstance {
  solver::ProblemSpec spec;
  lie::GroupTuple start;
  lie::GroupElement target;  ///< the sampled G_d
};

/// Two SO(n) variables, objective (1/2) sum_i ||log(G_d^T G_i)||_F (exact
/// variant smooths the root: sqrt(||.||^2 + 1e-18)), per-element inequalities
/// G_i(0,0) - 0.5 <= 0 and G_i(1,1) - 0.3 <= 0. The start is resampled per
/// element (cap 200) until strictly feasible.
ProblemInstance build_p1(int n, std::uint64_t seed, P1Norm variant = P1Norm::PaperExact,
                         int elements = 2);

/// Two SL(n) variables, objective (1/2) sum_i tr(G_d^{-1} G_i)^2, per-element
/// inequality -tr(G_d^{-1} G_i)^2 + 0.2 <= 0, feasible start as in build_p1.
ProblemInstance build_p2(int n, std::uint64_t seed, int elements = 2);

ProblemInstance build_problem(const BenchmarkConfig& config, std::uint64_t seed);

struct TrialResult {
  std::uint64_t seed = 0;
  bool success = false;
  double wall_time_s = 0.0;
  int iterations = 0;
  double final_error = std::numeric_limits<double>::infinity();
  solver::Status status = solver::Status::MaxIterations;
  bool sampling_failure = false;
  std::string failure_reason;

  // Trace-derived diagnostics used by the rate and soundness studies.
  int trailing_full_steps = 0;
  solver::ConvergenceOrder order;
  double min_interior = std::numeric_limits<double>::infinity();
  double max_membership_ratio = 0.0;
  double max_solve_rel_residual = 0.0;  ///< over iterations k >= 1
  double min_solve_rel_residual = 0.0;
  double max_unregularized_rel_residual = 0.0;
  int regularized_steps = 0;
};

/// Population rules: time/iterations over all trials, error over successful
/// trials only (error fields are NaN when nothing succeeded).
struct SummaryStats {
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double time_median = 0.0, time_mean = 0.0, time_sd = 0.0;
  double iterations_median = 0.0, iterations_mean = 0.0, iterations_sd = 0.0;
  double error_mean = std::numeric_limits<double>::quiet_NaN();
  double error_sd = std::numeric_limits<double>::quiet_NaN();
};

SummaryStats summarize(const std::vector<TrialResult>& results);

struct BenchmarkRun {
  BenchmarkConfig config;
  std::vector<TrialResult> results;
  SummaryStats stats;
};

/// One seeded trial: seed = base_seed + index; deterministic except wall time.
/// Build or solve failures are captured in the result, never thrown.
TrialResult run_trial(const BenchmarkConfig& config, int index);

/// Runs all trials (concurrently when threads > 1) and aggregates them in
/// trial-index order, so the aggregate does not depend on the thread count.
BenchmarkRun run_benchmark(const BenchmarkConfig& config);

/// Report with exactly the columns: Time(s) Median, Time(s) Mean±SD,
/// Iterations Median, Iterations Mean±SD, Success Rate, Error Mean±SD.
/// Byte-stable for fixed inputs.
std::string write_report(const BenchmarkRun& run, ReportFormat format);
void write_report_file(const BenchmarkRun& run, const std::string& path,
                       ReportFormat format);

// RFC-style CSV cells: quoted only when a cell contains a comma, quote, or
// newline. parse(emit(rows)) == rows and emit(parse(text)) == text for
// canonical text, which is the roundtrip contract.
std::string emit_csv(const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Convergence-rate bookkeeping over a finished run (Theorem 2 regimes).
struct RateStudy {
  int seeds = 0;
  int converged = 0;
  int fitted = 0;             ///< converged runs with a valid tail fit
  int full_tail_fitted = 0;   ///< fitted runs whose last >= 3 steps were full
  int quadratic = 0;          ///< among full_tail_fitted: q >= 1.7
  int linear = 0;             ///< among fitted: q in [0.8, 1.3] and c < 1
};

RateStudy rate_study(const BenchmarkRun& run);

}  // namespace mlgipm::bench
