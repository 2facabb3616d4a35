// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mlgipm/matfun.hpp"

namespace mlgipm::lie {

using matfun::Matrix;
using matfun::Vector;

enum class Family { SpecialOrthogonal, SpecialLinear, Translation };

/// A group family together with its size parameter: SO(n), SL(n), or T(d).
struct GroupKind {
  Family family = Family::SpecialOrthogonal;
  int n = 3;

  /// Dimension m of the Lie algebra: n(n-1)/2, n^2-1, or d.
  int algebra_dim() const;
  /// Side length of the ambient matrix representation (d+1 for T(d)).
  int ambient_size() const;
  /// Frobenius-style membership tolerance used by the solver invariants.
  double membership_tolerance() const;

  /// Short serialized form: "SO3", "SL7", "T5".
  std::string to_string() const;
  static GroupKind parse(std::string_view text);

  bool operator==(const GroupKind&) const = default;
};

inline GroupKind so(int n) { return {Family::SpecialOrthogonal, n}; }
inline GroupKind sl(int n) { return {Family::SpecialLinear, n}; }
inline GroupKind translation(int d) { return {Family::Translation, d}; }

/// Group element in its ambient matrix representation. For T(d) that is the
/// (d+1)x(d+1) affine form [[I, t], [0, 1]].
struct GroupElement {
  GroupKind kind;
  Matrix mat;
};

using GroupTuple = std::vector<GroupElement>;

/// Ordered Lie algebra basis E_1..E_m. so(n): E_ij - E_ji for i<j in
/// lexicographic order; sl(n): off-diagonal unit matrices E_ij (i != j,
/// lexicographic) followed by the traceless diagonals E_ii - E_{i+1,i+1};
/// t(d): single 1 in the last column.
std::vector<Matrix> generators(const GroupKind& kind);

/// Linear map from coordinates to the algebra: sum_i zeta_i E_i.
Matrix hat(const GroupKind& kind, const Vector& zeta);

/// Inverse of hat via the generator Gram system (the sl(n) diagonal
/// generators are not Frobenius-orthogonal, so a plain projection is wrong).
/// Throws DomainError when xi is not in the algebra to within 1e-6.
Vector vee(const GroupKind& kind, const Matrix& xi);

GroupElement identity(const GroupKind& kind);

/// Right-translated exponential chart: G * expm(hat(zeta)). Re-validates
/// membership and projects back when drift exceeds half the tolerance.
GroupElement exp_at(const GroupElement& g, const Vector& zeta);

/// Seeded random sampling. SO(n): QR of a Gaussian matrix with sign fix so
/// det = +1; SL(n): expm(hat(zeta)) with unit-norm Gaussian zeta; T(d):
/// Gaussian translation part.
GroupElement random_element(const GroupKind& kind, std::uint64_t seed);

/// Distance-to-group diagnostic: 0 iff the element is on its group
/// (numerically). SO(n): ||G^T G - I||_F + |det - 1|; SL(n): |det - 1|;
/// T(d): norm of the structural deviation.
double membership_residual(const GroupElement& g);

/// Sum of algebra dimensions over the tuple.
int total_algebra_dim(const GroupTuple& tuple);

}  // namespace mlgipm::lie
