// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mlgipm/diff.hpp"

namespace mlgipm::solver {

using diff::ScalarField;
using diff::VectorField;
using lie::GroupKind;
using lie::GroupTuple;
using matfun::Matrix;
using matfun::Vector;
using diff::RowVector;

/// Constrained problem over a tuple of group elements:
///   min f(X)  s.t.  g_i(X) <= 0 (i = 1..n1),  h_j(X) = 0 (j = 1..n2).
struct ProblemSpec {
  std::vector<GroupKind> kinds;
  ScalarField objective;
  VectorField inequalities;
  VectorField equalities;

  int num_inequalities() const { return inequalities.size(); }
  int num_equalities() const { return equalities.size(); }
  int primal_dim() const;
};

enum class AlphaMode { FractionToBoundary, Fixed };

struct SolverOptions {
  double tolerance = 1e-6;  ///< terminate when the mu=0 KKT residual is below this
  double tau = 0.995;       ///< fraction-to-the-boundary factor
  double sigma = 0.2;       ///< centering parameter
  double mu0 = 1.0;         ///< initial barrier
  int max_iterations = 500;
  AlphaMode alpha_mode = AlphaMode::FractionToBoundary;
  double fixed_alpha = 1.0;  ///< used verbatim when alpha_mode == Fixed
  /// Inexact-Newton scale: the solve right-hand side is -F + c*||F||*u with u
  /// a seeded uniform random unit vector. 0 means exact Newton.
  double perturb_c = 0.0;
  std::uint64_t perturb_seed = 0;
  bool symmetrize_curvature = true;
  double s_min = 1e-2;
  double s_margin = 1e-2;
  matfun::Options linalg;
  diff::FdOptions fd;
};

struct SolverState {
  GroupTuple x;
  Vector nu;      ///< inequality multipliers, strictly positive while iterating
  Vector lambda;  ///< equality multipliers
  Vector s;       ///< slacks, strictly positive while iterating
  double mu = 0.0;
  int k = 0;
  bool strictly_feasible_start = true;
};

struct IterationRecord {
  int k = 0;
  double kkt_norm = 0.0;  ///< mu=0 KKT residual norm at this iterate
  double mu = 0.0;
  double alpha = 0.0;      ///< step that produced this iterate (0 for the start)
  bool full_step = false;  ///< min(1, alpha_pri, alpha_dual) was attained at 1
  double objective = 0.0;
  double max_constraint_violation = 0.0;
  double max_membership_ratio = 0.0;  ///< membership residual / tolerance, max over elements
  double min_s = std::numeric_limits<double>::infinity();
  double min_nu = std::numeric_limits<double>::infinity();
  double solve_rel_residual = 0.0;  ///< measured ||J dx + F|| / ||F||
  bool regularized = false;
};

enum class Status { Converged, MaxIterations, NumericalFailure };

std::string to_string(Status s);

struct SolveReport {
  Status status = Status::MaxIterations;
  int iterations = 0;
  std::vector<IterationRecord> trace;  ///< length = iterations + 1
  GroupTuple final_x;
  Vector nu, lambda, s;
  double mu = 0.0;
  double final_kkt_norm = 0.0;
  std::string failure_message;

  bool converged() const { return status == Status::Converged; }
};

/// Slack/dual initialization: s_i = max(-g_i(X0), s_min) + s_margin,
/// nu_i = mu0 / s_i, lambda = 0. A start with some g_i >= 0 is accepted but
/// flagged; the g + s = 0 residual block drives the infeasibility out.
SolverState init_state(const ProblemSpec& spec, const GroupTuple& x0,
                       const SolverOptions& opts);

/// Stacked KKT vector [grad L; g + s; h; s.*nu - mu e]; pass mu = 0 for the
/// true (termination) residual and state.mu for the central-path field.
Vector kkt_residual(const ProblemSpec& spec, const SolverState& state, double mu,
                    const diff::FdOptions& fd = {});

/// Central-path form: complementarity relaxed by the state's own mu.
inline Vector kkt_residual(const ProblemSpec& spec, const SolverState& state) {
  return kkt_residual(spec, state, state.mu);
}

/// The 4x4 block Newton matrix over unknowns [zeta-blocks; dnu; dlambda; ds].
Matrix newton_matrix(const ProblemSpec& spec, const SolverState& state,
                     const SolverOptions& opts);

struct NewtonStep {
  Vector dx;
  double solve_rel_residual = 0.0;
  bool regularized = false;
  double condition = 0.0;
};

/// Solves J dx = -F (+ the seeded perturbation when opts.perturb_c > 0).
/// `rho_draws` must persist across iterations of one solve so the
/// perturbation direction sequence is reproducible.
NewtonStep newton_step(const ProblemSpec& spec, const SolverState& state,
                       const SolverOptions& opts, const Vector& f_mu,
                       std::mt19937_64& rho_draws);

/// One-shot form: builds the mu-relaxed residual and a fresh perturbation
/// stream from opts.perturb_seed.
NewtonStep newton_step(const ProblemSpec& spec, const SolverState& state,
                       const SolverOptions& opts);

struct StepLengths {
  double alpha = 0.0;
  double alpha_pri = std::numeric_limits<double>::infinity();
  double alpha_dual = std::numeric_limits<double>::infinity();
  bool unit_limited = false;  ///< min(1, alpha_pri, alpha_dual) == 1
};

/// alpha = tau * min(1, alpha_pri, alpha_dual) with the usual empty-set = inf
/// convention; keeps s and nu strictly positive.
StepLengths fraction_to_boundary(const Vector& s, const Vector& ds, const Vector& nu,
                                 const Vector& dnu, double tau);

/// Multiplicative update of the primal elements, additive update of
/// (nu, lambda, s) -- the closed form of the translation-group exponential.
SolverState apply_step(const ProblemSpec& spec, const SolverState& state,
                       const Vector& dx, double alpha);

/// mu = sigma * s.nu / n1 (0 when there are no inequalities).
double update_mu(const Vector& s, const Vector& nu, double sigma);

SolveReport solve(const ProblemSpec& spec, const GroupTuple& x0,
                  const SolverOptions& opts);

struct KktDiagnostics {
  Vector inequality_values;
  std::vector<int> active_set;
  double kkt_norm = 0.0;                    ///< mu=0 residual at the candidate
  bool stationary = false;                  ///< kkt_norm <= threshold
  double licq_min_singular_value = std::numeric_limits<double>::infinity();
  bool licq_flag = false;                   ///< true = rank deficiency detected
  double min_active_nu = std::numeric_limits<double>::infinity();
  bool strict_complementarity = true;
  double reduced_curvature_min_eig = std::numeric_limits<double>::infinity();
  bool second_order_ok = true;
  double newton_condition = 0.0;
};

struct DiagnosticsOptions {
  double active_tol = 1e-6;
  double stationarity_tol = 1e-5;
  double licq_tol = 1e-8;
  double complementarity_tol = 1e-8;
  double curvature_tol = 1e-10;
};

/// Regularity report at a candidate solution: active set, LICQ singular
/// values, strict complementarity, reduced curvature on the active-constraint
/// null space, and the condition estimate of the full Newton matrix.
KktDiagnostics kkt_diagnostics(const ProblemSpec& spec, const SolverState& state,
                               const SolverOptions& opts = {},
                               const DiagnosticsOptions& diag = {});

struct ConvergenceOrder {
  bool ok = false;
  double q = 0.0;  ///< fitted order
  double c = 0.0;  ///< fitted rate
  int points = 0;  ///< tail length used
  std::string message;
};

/// Fits log r_{k+1} = q log r_k + log c over the longest strictly decreasing
/// trace tail with residuals below 1e-2; needs at least 4 tail values.
ConvergenceOrder estimate_convergence_order(const std::vector<IterationRecord>& trace);

/// Full report (status, trace, final point) as a JSON text tree.
std::string report_to_json(const SolveReport& report, int indent = 2);

}  // namespace mlgipm::solver
