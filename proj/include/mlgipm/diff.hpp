// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "mlgipm/lie.hpp"

namespace mlgipm::diff {

using lie::GroupElement;
using lie::GroupTuple;
using matfun::Matrix;
using matfun::Vector;
using RowVector = Eigen::RowVectorXd;

/// Scalar function of a group tuple, optionally with analytic first/second
/// order information. Absent callbacks fall back to finite differences in
/// Lie-algebra coordinates.
struct ScalarField {
  std::function<double(const GroupTuple&)> eval;
  std::function<RowVector(const GroupTuple&)> analytic_gradient;
  std::function<Matrix(const GroupTuple&)> analytic_curvature;

  bool has_analytic_gradient() const { return static_cast<bool>(analytic_gradient); }
};

struct VectorField {
  std::vector<ScalarField> components;

  int size() const { return static_cast<int>(components.size()); }
};

/// Central-difference step sizes; the defaults are the usual machine-epsilon
/// powers for first- and nested second-order differences.
struct FdOptions {
  double first_order_step;
  double nested_second_order_step;
  FdOptions();
};

/// Returns the tuple with element `elem` replaced by its chart perturbation
/// along generator `gen` with parameter t.
GroupTuple perturbed(const GroupTuple& x, int elem, int gen, double t);

/// Central difference of f along one algebra coordinate.
double directional_derivative(const ScalarField& f, const GroupTuple& x, int elem,
                              int gen, double h);

/// Row of all n*m first derivatives; analytic when supplied, else finite
/// differences.
RowVector gradient_row(const ScalarField& f, const GroupTuple& x,
                       const FdOptions& fd = {});

/// Finite-difference row regardless of analytic availability (used by
/// check_gradient and tests).
RowVector fd_gradient_row(const ScalarField& f, const GroupTuple& x, double h);

/// Stacked gradient rows, one per component: l x (n*m).
Matrix sensitivity(const VectorField& f, const GroupTuple& x, const FdOptions& fd = {});

struct CurvatureResult {
  Matrix values;
  bool symmetrized = false;
  bool step_underflow_warning = false;
};

/// Second-order linearization: the sensitivity of the (transposed) gradient
/// row treated as a vector field. Nested finite differences by default; an
/// analytic curvature hook short-circuits the sweep. With `symmetrize` the
/// result is (H + H^T)/2 -- in noncommutative charts H itself need not be
/// symmetric away from critical points.
CurvatureResult curvature(const ScalarField& f, const GroupTuple& x,
                          bool symmetrize = true, const FdOptions& fd = {});

struct GradientCheckReport {
  double max_rel_discrepancy = 0.0;
  int worst_coordinate = -1;
  bool pass = false;
};

/// Compares the analytic gradient against Richardson-extrapolated central
/// differences; passes iff the scaled max discrepancy is <= 1e-5.
GradientCheckReport check_gradient(const ScalarField& f, const GroupTuple& x);

}  // namespace mlgipm::diff
