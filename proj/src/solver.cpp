// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "json.hpp"
#include "mlgipm/errors.hpp"

namespace mlgipm::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_options(const SolverOptions& opts) {
  if (!(opts.tau > 0.0 && opts.tau < 1.0))
    throw DomainError("solver: tau must lie in (0, 1)");
  if (!(opts.sigma > 0.0 && opts.sigma < 1.0))
    throw DomainError("solver: sigma must lie in (0, 1)");
  if (opts.perturb_c < 0.0) throw DomainError("solver: perturb_c must be >= 0");
  if (opts.mu0 <= 0.0) throw DomainError("solver: mu0 must be positive");
  if (opts.max_iterations < 0) throw DomainError("solver: max_iterations must be >= 0");
  if (opts.alpha_mode == AlphaMode::Fixed && !(opts.fixed_alpha > 0.0 && opts.fixed_alpha <= 1.0))
    throw DomainError("solver: fixed alpha must lie in (0, 1]");
}

void validate_tuple(const ProblemSpec& spec, const GroupTuple& x) {
  if (static_cast<int>(x.size()) != static_cast<int>(spec.kinds.size()))
    throw DimensionError("solver: tuple length does not match the problem's group kinds");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i].kind == spec.kinds[i]))
      throw DimensionError("solver: tuple element kind mismatch at index " + std::to_string(i));
    const double res = lie::membership_residual(x[i]);
    if (res > x[i].kind.membership_tolerance())
      throw DomainError("solver: start element " + std::to_string(i) +
                        " violates group membership (residual " + std::to_string(res) + ")");
  }
}

Vector eval_components(const VectorField& f, const GroupTuple& x) {
  Vector v(f.size());
  for (int i = 0; i < f.size(); ++i) v(i) = f.components[i].eval(x);
  return v;
}

/// grad L = grad f + sum_i nu_i grad g_i + sum_j lambda_j grad h_j; rows are
/// combined per field so analytic pieces stay analytic even when others fall
/// back to finite differences.
RowVector lagrangian_gradient(const ProblemSpec& spec, const GroupTuple& x,
                              const Vector& nu, const Vector& lambda,
                              const diff::FdOptions& fd) {
  RowVector row = diff::gradient_row(spec.objective, x, fd);
  for (int i = 0; i < spec.num_inequalities(); ++i)
    if (nu(i) != 0.0) row += nu(i) * diff::gradient_row(spec.inequalities.components[i], x, fd);
  for (int j = 0; j < spec.num_equalities(); ++j)
    if (lambda(j) != 0.0)
      row += lambda(j) * diff::gradient_row(spec.equalities.components[j], x, fd);
  return row;
}

/// The Lagrangian as a ScalarField so the generic curvature machinery applies.
/// Analytic hooks are forwarded only when every participating field has them.
diff::ScalarField lagrangian_field(const ProblemSpec& spec, const Vector& nu,
                                   const Vector& lambda) {
  diff::ScalarField lagr;
  lagr.eval = [&spec, nu, lambda](const GroupTuple& x) {
    double v = spec.objective.eval(x);
    for (int i = 0; i < spec.num_inequalities(); ++i)
      v += nu(i) * spec.inequalities.components[i].eval(x);
    for (int j = 0; j < spec.num_equalities(); ++j)
      v += lambda(j) * spec.equalities.components[j].eval(x);
    return v;
  };

  bool grad_ok = spec.objective.has_analytic_gradient();
  for (const auto& c : spec.inequalities.components) grad_ok = grad_ok && c.has_analytic_gradient();
  for (const auto& c : spec.equalities.components) grad_ok = grad_ok && c.has_analytic_gradient();
  if (grad_ok) {
    lagr.analytic_gradient = [&spec, nu, lambda](const GroupTuple& x) {
      RowVector row = spec.objective.analytic_gradient(x);
      for (int i = 0; i < spec.num_inequalities(); ++i)
        row += nu(i) * spec.inequalities.components[i].analytic_gradient(x);
      for (int j = 0; j < spec.num_equalities(); ++j)
        row += lambda(j) * spec.equalities.components[j].analytic_gradient(x);
      return row;
    };
  }

  bool curv_ok = static_cast<bool>(spec.objective.analytic_curvature);
  for (const auto& c : spec.inequalities.components)
    curv_ok = curv_ok && static_cast<bool>(c.analytic_curvature);
  for (const auto& c : spec.equalities.components)
    curv_ok = curv_ok && static_cast<bool>(c.analytic_curvature);
  if (curv_ok) {
    lagr.analytic_curvature = [&spec, nu, lambda](const GroupTuple& x) {
      Matrix h = spec.objective.analytic_curvature(x);
      for (int i = 0; i < spec.num_inequalities(); ++i)
        h += nu(i) * spec.inequalities.components[i].analytic_curvature(x);
      for (int j = 0; j < spec.num_equalities(); ++j)
        h += lambda(j) * spec.equalities.components[j].analytic_curvature(x);
      return h;
    };
  }
  return lagr;
}

IterationRecord make_record(const ProblemSpec& spec, const SolverState& state,
                            const SolverOptions& opts, double alpha, bool full_step,
                            const NewtonStep* step) {
  IterationRecord rec;
  rec.k = state.k;
  rec.kkt_norm = kkt_residual(spec, state, 0.0, opts.fd).norm();
  rec.mu = state.mu;
  rec.alpha = alpha;
  rec.full_step = full_step;
  rec.objective = spec.objective.eval(state.x);

  double viol = 0.0;
  for (int i = 0; i < spec.num_inequalities(); ++i)
    viol = std::max(viol, spec.inequalities.components[i].eval(state.x));
  for (int j = 0; j < spec.num_equalities(); ++j)
    viol = std::max(viol, std::abs(spec.equalities.components[j].eval(state.x)));
  rec.max_constraint_violation = std::max(viol, 0.0);

  double ratio = 0.0;
  for (const auto& g : state.x)
    ratio = std::max(ratio, lie::membership_residual(g) / g.kind.membership_tolerance());
  rec.max_membership_ratio = ratio;

  if (state.s.size() > 0) {
    rec.min_s = state.s.minCoeff();
    rec.min_nu = state.nu.minCoeff();
  }
  if (step != nullptr) {
    rec.solve_rel_residual = step->solve_rel_residual;
    rec.regularized = step->regularized;
  }
  return rec;
}

}  // namespace

int ProblemSpec::primal_dim() const {
  int d = 0;
  for (const auto& k : kinds) d += k.algebra_dim();
  return d;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max-iterations";
    case Status::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

SolverState init_state(const ProblemSpec& spec, const GroupTuple& x0,
                       const SolverOptions& opts) {
  validate_options(opts);
  validate_tuple(spec, x0);

  SolverState st;
  st.x = x0;
  const int n1 = spec.num_inequalities();
  st.s = Vector(n1);
  st.nu = Vector(n1);
  st.lambda = Vector::Zero(spec.num_equalities());
  st.mu = opts.mu0;
  st.k = 0;
  for (int i = 0; i < n1; ++i) {
    const double gi = spec.inequalities.components[i].eval(x0);
    if (gi >= 0.0) st.strictly_feasible_start = false;
    st.s(i) = std::max(-gi, opts.s_min) + opts.s_margin;
    st.nu(i) = opts.mu0 / st.s(i);
  }
  return st;
}

Vector kkt_residual(const ProblemSpec& spec, const SolverState& state, double mu,
                    const diff::FdOptions& fd) {
  const int nm = spec.primal_dim();
  const int n1 = spec.num_inequalities();
  const int n2 = spec.num_equalities();
  Vector f(nm + n1 + n2 + n1);
  f.segment(0, nm) =
      lagrangian_gradient(spec, state.x, state.nu, state.lambda, fd).transpose();
  if (n1 > 0) f.segment(nm, n1) = eval_components(spec.inequalities, state.x) + state.s;
  if (n2 > 0) f.segment(nm + n1, n2) = eval_components(spec.equalities, state.x);
  if (n1 > 0)
    f.segment(nm + n1 + n2, n1) =
        state.s.cwiseProduct(state.nu) - mu * Vector::Ones(n1);
  return f;
}

Matrix newton_matrix(const ProblemSpec& spec, const SolverState& state,
                     const SolverOptions& opts) {
  const int nm = spec.primal_dim();
  const int n1 = spec.num_inequalities();
  const int n2 = spec.num_equalities();
  const int dim = nm + n1 + n2 + n1;

  Matrix j = Matrix::Zero(dim, dim);
  const diff::ScalarField lagr = lagrangian_field(spec, state.nu, state.lambda);
  j.block(0, 0, nm, nm) =
      diff::curvature(lagr, state.x, opts.symmetrize_curvature, opts.fd).values;

  if (n1 > 0) {
    const Matrix jac_g = diff::sensitivity(spec.inequalities, state.x, opts.fd);
    j.block(0, nm, nm, n1) = jac_g.transpose();
    j.block(nm, 0, n1, nm) = jac_g;
    j.block(nm, nm + n1 + n2, n1, n1) = Matrix::Identity(n1, n1);
    j.block(nm + n1 + n2, nm, n1, n1) = state.s.asDiagonal();
    j.block(nm + n1 + n2, nm + n1 + n2, n1, n1) = state.nu.asDiagonal();
  }
  if (n2 > 0) {
    const Matrix jac_h = diff::sensitivity(spec.equalities, state.x, opts.fd);
    j.block(0, nm + n1, nm, n2) = jac_h.transpose();
    j.block(nm + n1, 0, n2, nm) = jac_h;
  }
  return j;
}

NewtonStep newton_step(const ProblemSpec& spec, const SolverState& state,
                       const SolverOptions& opts, const Vector& f_mu,
                       std::mt19937_64& rho_draws) {
  const Matrix j = newton_matrix(spec, state, opts);
  if (f_mu.size() != j.rows())
    throw DimensionError("newton_step: residual length does not match the system");

  Vector rhs = -f_mu;
  const double f_norm = f_mu.norm();
  if (opts.perturb_c > 0.0 && f_norm > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector u(rhs.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = gauss(rho_draws);
    const double un = u.norm();
    if (un > 0.0) rhs += (opts.perturb_c * f_norm / un) * u;
  }

  const matfun::SolveResult res = matfun::solve_dense(j, rhs, opts.linalg);
  NewtonStep step;
  step.dx = res.x;
  step.regularized = res.regularized;
  step.condition = res.condition;
  step.solve_rel_residual = f_norm > 0.0 ? (j * res.x + f_mu).norm() / f_norm : 0.0;
  return step;
}

NewtonStep newton_step(const ProblemSpec& spec, const SolverState& state,
                       const SolverOptions& opts) {
  std::mt19937_64 rng(opts.perturb_seed);
  return newton_step(spec, state, opts, kkt_residual(spec, state, state.mu, opts.fd), rng);
}

StepLengths fraction_to_boundary(const Vector& s, const Vector& ds, const Vector& nu,
                                 const Vector& dnu, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("fraction_to_boundary: tau not in (0, 1)");
  if (s.size() != ds.size() || nu.size() != dnu.size() || s.size() != nu.size())
    throw DimensionError("fraction_to_boundary: mismatched vector lengths");
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) <= 0.0 || nu(i) <= 0.0)
      throw NumericalError("fraction_to_boundary: nonpositive slack or multiplier — "
                           "iterate left the interior (state corrupted)");

  StepLengths out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (ds(i) < 0.0) out.alpha_pri = std::min(out.alpha_pri, -s(i) / ds(i));
    if (dnu(i) < 0.0) out.alpha_dual = std::min(out.alpha_dual, -nu(i) / dnu(i));
  }
  const double raw = std::min({1.0, out.alpha_pri, out.alpha_dual});
  out.unit_limited = raw >= 1.0;
  out.alpha = tau * raw;
  return out;
}

SolverState apply_step(const ProblemSpec& spec, const SolverState& state,
                       const Vector& dx, double alpha) {
  const int nm = spec.primal_dim();
  const int n1 = spec.num_inequalities();
  const int n2 = spec.num_equalities();
  if (dx.size() != nm + n1 + n2 + n1)
    throw DimensionError("apply_step: direction length does not match the problem");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("apply_step: alpha not in (0, 1]");

  SolverState next = state;
  int off = 0;
  for (std::size_t e = 0; e < state.x.size(); ++e) {
    const int m = state.x[e].kind.algebra_dim();
    next.x[e] = lie::exp_at(state.x[e], alpha * dx.segment(off, m));
    off += m;
  }
  if (n1 > 0) {
    next.nu += alpha * dx.segment(nm, n1);
    next.s += alpha * dx.segment(nm + n1 + n2, n1);
    if (next.s.minCoeff() <= 0.0 || next.nu.minCoeff() <= 0.0)
      throw NumericalError(
          "apply_step: step drove a slack or multiplier nonpositive (state corrupted; "
          "alpha too large for the boundary)");
  }
  if (n2 > 0) next.lambda += alpha * dx.segment(nm + n1, n2);
  return next;
}

double update_mu(const Vector& s, const Vector& nu, double sigma) {
  if (s.size() != nu.size()) throw DimensionError("update_mu: mismatched vector lengths");
  if (s.size() == 0) return 0.0;
  return sigma * s.dot(nu) / static_cast<double>(s.size());
}

SolveReport solve(const ProblemSpec& spec, const GroupTuple& x0,
                  const SolverOptions& opts) {
  SolverState state = init_state(spec, x0, opts);  // validates opts and x0
  std::mt19937_64 rho_rng(opts.perturb_seed);

  SolveReport rep;
  rep.trace.push_back(make_record(spec, state, opts, 0.0, false, nullptr));

  while (true) {
    if (rep.trace.back().kkt_norm <= opts.tolerance) {
      rep.status = Status::Converged;
      break;
    }
    if (state.k >= opts.max_iterations) {
      rep.status = Status::MaxIterations;
      break;
    }
    try {
      const Vector f_mu = kkt_residual(spec, state, state.mu, opts.fd);
      const NewtonStep step = newton_step(spec, state, opts, f_mu, rho_rng);

      const int nm = spec.primal_dim();
      const int n1 = spec.num_inequalities();
      const int n2 = spec.num_equalities();
      double alpha = 0.0;
      bool full_step = false;
      if (opts.alpha_mode == AlphaMode::FractionToBoundary) {
        const StepLengths sl =
            fraction_to_boundary(state.s, step.dx.segment(nm + n1 + n2, n1), state.nu,
                                 step.dx.segment(nm, n1), opts.tau);
        alpha = sl.alpha;
        full_step = sl.unit_limited;
      } else {
        alpha = opts.fixed_alpha;
        full_step = opts.fixed_alpha >= 1.0;
      }

      state = apply_step(spec, state, step.dx, alpha);
      state.k += 1;
      state.mu = update_mu(state.s, state.nu, opts.sigma);
      rep.trace.push_back(make_record(spec, state, opts, alpha, full_step, &step));
    } catch (const std::exception& err) {
      rep.status = Status::NumericalFailure;
      rep.failure_message = err.what();
      break;
    }
  }

  rep.iterations = state.k;
  rep.final_x = state.x;
  rep.nu = state.nu;
  rep.lambda = state.lambda;
  rep.s = state.s;
  rep.mu = state.mu;
  rep.final_kkt_norm = rep.trace.back().kkt_norm;
  return rep;
}

KktDiagnostics kkt_diagnostics(const ProblemSpec& spec, const SolverState& state,
                               const SolverOptions& opts, const DiagnosticsOptions& diag) {
  KktDiagnostics out;
  const int nm = spec.primal_dim();
  const int n1 = spec.num_inequalities();
  const int n2 = spec.num_equalities();

  out.inequality_values = eval_components(spec.inequalities, state.x);
  for (int i = 0; i < n1; ++i)
    if (std::abs(out.inequality_values(i)) <= diag.active_tol) out.active_set.push_back(i);

  out.kkt_norm = kkt_residual(spec, state, 0.0, opts.fd).norm();
  out.stationary = out.kkt_norm <= diag.stationarity_tol;

  // LICQ on stacked active-inequality and equality gradient rows.
  const int n_active = static_cast<int>(out.active_set.size());
  Matrix a(n_active + n2, nm);
  const Matrix jac_g =
      n1 > 0 ? diff::sensitivity(spec.inequalities, state.x, opts.fd) : Matrix(0, nm);
  for (int r = 0; r < n_active; ++r) a.row(r) = jac_g.row(out.active_set[r]);
  if (n2 > 0) a.bottomRows(n2) = diff::sensitivity(spec.equalities, state.x, opts.fd);

  Matrix null_basis = Matrix::Identity(nm, nm);
  if (a.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    out.licq_min_singular_value = svd.singularValues().minCoeff();
    out.licq_flag = a.rows() > nm || out.licq_min_singular_value <= diag.licq_tol;
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > diag.licq_tol) ++rank;
    null_basis = svd.matrixV().rightCols(nm - rank);
  }

  for (int i : out.active_set) out.min_active_nu = std::min(out.min_active_nu, state.nu(i));
  out.strict_complementarity =
      out.active_set.empty() || out.min_active_nu > diag.complementarity_tol;

  if (null_basis.cols() > 0) {
    const Matrix h =
        diff::curvature(lagrangian_field(spec, state.nu, state.lambda), state.x,
                        /*symmetrize=*/true, opts.fd)
            .values;
    const Matrix reduced = null_basis.transpose() * h * null_basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()));
    out.reduced_curvature_min_eig = eig.eigenvalues().minCoeff();
    out.second_order_ok = out.reduced_curvature_min_eig > diag.curvature_tol;
  }

  const Matrix j = newton_matrix(spec, state, opts);
  Eigen::PartialPivLU<Matrix> lu(j);
  const Matrix inv = lu.inverse();
  out.newton_condition = j.cwiseAbs().colwise().sum().maxCoeff() *
                         inv.cwiseAbs().colwise().sum().maxCoeff();
  return out;
}

ConvergenceOrder estimate_convergence_order(const std::vector<IterationRecord>& trace) {
  ConvergenceOrder out;
  std::vector<double> r;
  r.reserve(trace.size());
  for (const auto& rec : trace) r.push_back(rec.kkt_norm);
  // Drop exact zeros at the very end (log undefined); they only occur when
  // the residual underflows past the last representable decrease.
  while (!r.empty() && r.back() <= 0.0) r.pop_back();

  // Longest strictly decreasing suffix with every value below 1e-2.
  int start = static_cast<int>(r.size());
  for (int i = static_cast<int>(r.size()) - 1; i >= 0; --i) {
    if (!(r[i] < 1e-2) || r[i] <= 0.0) break;
    if (i + 1 < static_cast<int>(r.size()) && !(r[i] > r[i + 1])) break;
    start = i;
  }
  const int points = static_cast<int>(r.size()) - start;
  out.points = points;
  if (points < 4) {
    out.message = "not enough data: need >= 4 strictly decreasing residuals below 1e-2, got " +
                  std::to_string(std::max(points, 0));
    return out;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int pairs = points - 1;
  for (int i = start; i + 1 < static_cast<int>(r.size()); ++i) {
    const double x = std::log(r[i]);
    const double y = std::log(r[i + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = pairs * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) {
    out.message = "degenerate fit: residuals do not vary";
    return out;
  }
  out.q = (pairs * sxy - sx * sy) / denom;
  out.c = std::exp((sy - out.q * sx) / pairs);
  out.ok = true;
  return out;
}

std::string report_to_json(const SolveReport& report, int indent) {
  nlohmann::json j;
  j["status"] = to_string(report.status);
  j["converged"] = report.converged();
  j["iterations"] = report.iterations;
  j["final_kkt_norm"] = report.final_kkt_norm;
  j["mu"] = report.mu;
  if (!report.failure_message.empty()) j["failure_message"] = report.failure_message;

  auto vec = [](const Vector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["nu"] = vec(report.nu);
  j["lambda"] = vec(report.lambda);
  j["s"] = vec(report.s);

  j["final_x"] = nlohmann::json::array();
  for (const auto& g : report.final_x) {
    nlohmann::json je;
    je["kind"] = g.kind.to_string();
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < g.mat.rows(); ++r) {
      std::vector<double> row(g.mat.cols());
      for (Eigen::Index c = 0; c < g.mat.cols(); ++c) row[c] = g.mat(r, c);
      rows.push_back(std::move(row));
    }
    je["matrix"] = rows;
    j["final_x"].push_back(std::move(je));
  }

  j["trace"] = nlohmann::json::array();
  for (const auto& rec : report.trace) {
    nlohmann::json jr;
    jr["k"] = rec.k;
    jr["kkt_norm"] = rec.kkt_norm;
    jr["mu"] = rec.mu;
    jr["alpha"] = rec.alpha;
    jr["full_step"] = rec.full_step;
    jr["objective"] = rec.objective;
    jr["max_constraint_violation"] = rec.max_constraint_violation;
    jr["max_membership_ratio"] = rec.max_membership_ratio;
    if (std::isfinite(rec.min_s)) jr["min_s"] = rec.min_s;
    if (std::isfinite(rec.min_nu)) jr["min_nu"] = rec.min_nu;
    jr["solve_rel_residual"] = rec.solve_rel_residual;
    jr["regularized"] = rec.regularized;
    j["trace"].push_back(std::move(jr));
  }
  return j.dump(indent);
}

}  // namespace mlgipm::solver
