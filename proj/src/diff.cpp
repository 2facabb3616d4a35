// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/diff.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mlgipm::diff {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

FdOptions::FdOptions()
    : first_order_step(std::cbrt(kEps)),
      nested_second_order_step(std::pow(kEps, 0.25)) {}

GroupTuple perturbed(const GroupTuple& x, int elem, int gen, double t) {
  const auto& g = x[static_cast<std::size_t>(elem)];
  Vector zeta = Vector::Zero(g.kind.algebra_dim());
  zeta[gen] = t;
  GroupTuple out = x;
  out[static_cast<std::size_t>(elem)] = lie::exp_at(g, zeta);
  return out;
}

double directional_derivative(const ScalarField& f, const GroupTuple& x, int elem,
                              int gen, double h) {
  if (elem < 0 || elem >= static_cast<int>(x.size())) {
    throw DimensionError("directional_derivative: element index out of range");
  }
  if (gen < 0 || gen >= x[static_cast<std::size_t>(elem)].kind.algebra_dim()) {
    throw DimensionError("directional_derivative: generator index out of range");
  }
  if (!(h > 0.0)) {
    throw DomainError("directional_derivative: step must be positive");
  }
  double fp, fm;
  try {
    fp = f.eval(perturbed(x, elem, gen, h));
    fm = f.eval(perturbed(x, elem, gen, -h));
  } catch (const std::exception& e) {
    throw NumericalError("field evaluation failed at element " + std::to_string(elem) +
                         ", generator " + std::to_string(gen) + ": " + e.what());
  }
  return (fp - fm) / (2.0 * h);
}

RowVector fd_gradient_row(const ScalarField& f, const GroupTuple& x, double h) {
  RowVector row(lie::total_algebra_dim(x));
  int col = 0;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    const int m = x[static_cast<std::size_t>(i)].kind.algebra_dim();
    for (int j = 0; j < m; ++j) {
      row[col++] = directional_derivative(f, x, i, j, h);
    }
  }
  return row;
}

RowVector gradient_row(const ScalarField& f, const GroupTuple& x, const FdOptions& fd) {
  if (f.has_analytic_gradient()) {
    RowVector row = f.analytic_gradient(x);
    if (row.size() != lie::total_algebra_dim(x)) {
      throw DimensionError("gradient_row: analytic gradient has length " +
                           std::to_string(row.size()) + ", expected " +
                           std::to_string(lie::total_algebra_dim(x)));
    }
    return row;
  }
  return fd_gradient_row(f, x, fd.first_order_step);
}

Matrix sensitivity(const VectorField& f, const GroupTuple& x, const FdOptions& fd) {
  const int total = lie::total_algebra_dim(x);
  Matrix jac(f.size(), total);
  for (int r = 0; r < f.size(); ++r) {
    try {
      jac.row(r) = gradient_row(f.components[static_cast<std::size_t>(r)], x, fd);
    } catch (const std::exception& e) {
      throw NumericalError("sensitivity: component " + std::to_string(r) +
                           " failed: " + e.what());
    }
  }
  return jac;
}

CurvatureResult curvature(const ScalarField& f, const GroupTuple& x, bool symmetrize,
                          const FdOptions& fd) {
  CurvatureResult result;
  if (f.analytic_curvature) {
    result.values = f.analytic_curvature(x);
  } else {
    const int total = lie::total_algebra_dim(x);
    // Differencing an analytic gradient tolerates a smaller step than
    // differencing a gradient that is itself a central difference.
    const double h = f.has_analytic_gradient() ? fd.first_order_step
                                               : fd.nested_second_order_step;
    result.step_underflow_warning = !(h > kEps);
    result.values.resize(total, total);
    int col = 0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
      const int m = x[static_cast<std::size_t>(i)].kind.algebra_dim();
      for (int j = 0; j < m; ++j) {
        const RowVector gp = gradient_row(f, perturbed(x, i, j, h), fd);
        const RowVector gm = gradient_row(f, perturbed(x, i, j, -h), fd);
        result.values.col(col++) = (gp - gm).transpose() / (2.0 * h);
      }
    }
  }
  if (symmetrize) {
    result.values = 0.5 * (result.values + result.values.transpose()).eval();
    result.symmetrized = true;
  }
  return result;
}

GradientCheckReport check_gradient(const ScalarField& f, const GroupTuple& x) {
  if (!f.has_analytic_gradient()) {
    throw DomainError("check_gradient: field has no analytic gradient");
  }
  const FdOptions fd;
  const double h = fd.first_order_step;
  const RowVector coarse = fd_gradient_row(f, x, h);
  const RowVector fine = fd_gradient_row(f, x, 0.5 * h);
  const RowVector richardson = (4.0 * fine - coarse) / 3.0;
  const RowVector analytic = f.analytic_gradient(x);

  GradientCheckReport report;
  const double scale = std::max(1.0, richardson.cwiseAbs().maxCoeff());
  for (int i = 0; i < richardson.size(); ++i) {
    const double disc = std::abs(analytic[i] - richardson[i]) / scale;
    if (disc > report.max_rel_discrepancy) {
      report.max_rel_discrepancy = disc;
      report.worst_coordinate = i;
    }
  }
  report.pass = report.max_rel_discrepancy <= 1e-5;
  return report;
}

}  // namespace mlgipm::diff
