// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "mlgipm/errors.hpp"

namespace mlgipm::matfun {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tunables for the dense kernels. Defaults are the ones used everywhere in
/// the solver; tests override them to probe edge behavior.
struct Options {
  /// Stop the square-root iteration in logm once ||M - I||_1 falls below this.
  double logm_sqrt_tol = 1e-12;
  /// Maximum number of principal square roots taken before the log series.
  int logm_max_sqrts = 50;
  /// Iteration cap for one Denman-Beavers square root.
  int logm_max_db_iters = 60;
  /// 1-norm condition estimate above which solve_dense regularizes.
  double condition_cap = 1e12;
  /// Tikhonov shift is tikhonov_scale * ||A||_F.
  double tikhonov_scale = 1e-8;
};

/// Matrix exponential by scaling-and-squaring with diagonal Pade
/// approximants up to degree 13 (thresholds per the standard scheme).
Matrix expm(const Matrix& a);

/// Principal matrix logarithm by inverse scaling-and-squaring: repeated
/// principal square roots (Denman-Beavers, product form) followed by a
/// Pade approximant of log(I + Y).
///
/// Throws DomainError if the input is singular or has an eigenvalue on the
/// closed negative real axis, NumericalError if the square-root iteration
/// stalls.
Matrix logm(const Matrix& a, const Options& opts = {});

struct SolveResult {
  Vector x;
  /// 1-norm condition estimate of the matrix actually factorized.
  double condition = 0.0;
  /// True when the Tikhonov fallback produced the solution.
  bool regularized = false;
};

/// Solves A x = b by partially pivoted LU. If the condition estimate
/// exceeds opts.condition_cap, retries on A + delta*I and flags the result.
SolveResult solve_dense(const Matrix& a, const Vector& b, const Options& opts = {});

}  // namespace mlgipm::matfun
