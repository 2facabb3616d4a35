// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/lie.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace mlgipm::lie {

int GroupKind::algebra_dim() const {
  switch (family) {
    case Family::SpecialOrthogonal: return n * (n - 1) / 2;
    case Family::SpecialLinear: return n * n - 1;
    case Family::Translation: return n;
  }
  return 0;
}

int GroupKind::ambient_size() const {
  return family == Family::Translation ? n + 1 : n;
}

double GroupKind::membership_tolerance() const {
  switch (family) {
    case Family::SpecialOrthogonal: return 1e-9;
    case Family::SpecialLinear: return 1e-8;
    case Family::Translation: return 1e-12;
  }
  return 0.0;
}

std::string GroupKind::to_string() const {
  switch (family) {
    case Family::SpecialOrthogonal: return "SO" + std::to_string(n);
    case Family::SpecialLinear: return "SL" + std::to_string(n);
    case Family::Translation: return "T" + std::to_string(n);
  }
  return {};
}

GroupKind GroupKind::parse(std::string_view text) {
  Family family;
  std::size_t digits;
  if (text.starts_with("SO")) {
    family = Family::SpecialOrthogonal;
    digits = 2;
  } else if (text.starts_with("SL")) {
    family = Family::SpecialLinear;
    digits = 2;
  } else if (text.starts_with("T")) {
    family = Family::Translation;
    digits = 1;
  } else {
    throw DomainError("GroupKind: cannot parse '" + std::string(text) + "'");
  }
  int n = 0;
  for (std::size_t i = digits; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw DomainError("GroupKind: cannot parse '" + std::string(text) + "'");
    }
    n = 10 * n + (text[i] - '0');
  }
  if (n < 1 || (family != Family::Translation && n < 2)) {
    throw DomainError("GroupKind: invalid size in '" + std::string(text) + "'");
  }
  return {family, n};
}

std::vector<Matrix> generators(const GroupKind& kind) {
  std::vector<Matrix> basis;
  basis.reserve(kind.algebra_dim());
  const int n = kind.n;
  switch (kind.family) {
    case Family::SpecialOrthogonal:
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          Matrix e = Matrix::Zero(n, n);
          e(i, j) = -1.0;
          e(j, i) = 1.0;
          basis.push_back(std::move(e));
        }
      }
      break;
    case Family::SpecialLinear:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          Matrix e = Matrix::Zero(n, n);
          e(i, j) = 1.0;
          basis.push_back(std::move(e));
        }
      }
      for (int i = 0; i + 1 < n; ++i) {
        Matrix e = Matrix::Zero(n, n);
        e(i, i) = 1.0;
        e(i + 1, i + 1) = -1.0;
        basis.push_back(std::move(e));
      }
      break;
    case Family::Translation:
      for (int i = 0; i < n; ++i) {
        Matrix e = Matrix::Zero(n + 1, n + 1);
        e(i, n) = 1.0;
        basis.push_back(std::move(e));
      }
      break;
  }
  return basis;
}

Matrix hat(const GroupKind& kind, const Vector& zeta) {
  const int m = kind.algebra_dim();
  if (zeta.size() != m) {
    throw DimensionError("hat: expected " + std::to_string(m) + " coordinates, got " +
                         std::to_string(zeta.size()));
  }
  const int a = kind.ambient_size();
  Matrix xi = Matrix::Zero(a, a);
  const auto basis = generators(kind);
  for (int i = 0; i < m; ++i) xi += zeta[i] * basis[i];
  return xi;
}

Vector vee(const GroupKind& kind, const Matrix& xi) {
  const int a = kind.ambient_size();
  if (xi.rows() != a || xi.cols() != a) {
    throw DimensionError("vee: matrix size does not match the group's ambient size");
  }
  const auto basis = generators(kind);
  const int m = static_cast<int>(basis.size());
  Matrix gram(m, m);
  Vector rhs(m);
  for (int i = 0; i < m; ++i) {
    rhs[i] = (basis[i].array() * xi.array()).sum();
    for (int j = i; j < m; ++j) {
      gram(i, j) = gram(j, i) = (basis[i].array() * basis[j].array()).sum();
    }
  }
  Vector zeta = Eigen::PartialPivLU<Matrix>(gram).solve(rhs);
  const double residual = (hat(kind, zeta) - xi).norm();
  if (residual > 1e-6 * std::max(1.0, xi.norm())) {
    throw DomainError("vee: matrix is not in the " + kind.to_string() +
                      " algebra (projection residual " + std::to_string(residual) + ")");
  }
  return zeta;
}

GroupElement identity(const GroupKind& kind) {
  const int a = kind.ambient_size();
  return {kind, Matrix::Identity(a, a)};
}

namespace {

// Closest-group projection used only when a chart step drifted:
// SO(n) by the polar factor, SL(n) by determinant rescaling.
Matrix project_to_group(const GroupKind& kind, const Matrix& g) {
  switch (kind.family) {
    case Family::SpecialOrthogonal: {
      Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Matrix q = svd.matrixU() * svd.matrixV().transpose();
      if (q.determinant() < 0.0) {
        Matrix u = svd.matrixU();
        u.col(u.cols() - 1) *= -1.0;
        q = u * svd.matrixV().transpose();
      }
      return q;
    }
    case Family::SpecialLinear: {
      const double det = g.determinant();
      return g * std::pow(det, -1.0 / kind.n);
    }
    case Family::Translation: {
      Matrix fixed = Matrix::Identity(g.rows(), g.cols());
      fixed.topRightCorner(kind.n, 1) = g.topRightCorner(kind.n, 1);
      return fixed;
    }
  }
  return g;
}

}  // namespace

GroupElement exp_at(const GroupElement& g, const Vector& zeta) {
  GroupElement out{g.kind, Matrix()};
  if (g.kind.family == Family::Translation) {
    // exp is exact here: hat(zeta) is nilpotent of order 2.
    out.mat = g.mat;
    out.mat.topRightCorner(g.kind.n, 1) += zeta;
  } else {
    out.mat = g.mat * matfun::expm(hat(g.kind, zeta));
  }
  const double tol = g.kind.membership_tolerance();
  if (membership_residual(out) > 0.5 * tol) {
    out.mat = project_to_group(out.kind, out.mat);
    if (membership_residual(out) > tol) {
      throw GroupDriftError("exp_at: element left " + g.kind.to_string() +
                            " beyond the cleanup tolerance");
    }
  }
  return out;
}

GroupElement random_element(const GroupKind& kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = kind.n;
  switch (kind.family) {
    case Family::SpecialOrthogonal: {
      Matrix a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
      Eigen::HouseholderQR<Matrix> qr(a);
      Matrix q = qr.householderQ();
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
      }
      if (q.determinant() < 0.0) q.col(n - 1) *= -1.0;
      return {kind, std::move(q)};
    }
    case Family::SpecialLinear: {
      Vector zeta(kind.algebra_dim());
      for (int i = 0; i < zeta.size(); ++i) zeta[i] = gauss(rng);
      zeta.normalize();
      return {kind, matfun::expm(hat(kind, zeta))};
    }
    case Family::Translation: {
      Vector t(n);
      for (int i = 0; i < n; ++i) t[i] = gauss(rng);
      GroupElement e = identity(kind);
      e.mat.topRightCorner(n, 1) = t;
      return e;
    }
  }
  return identity(kind);
}

double membership_residual(const GroupElement& g) {
  const int a = g.kind.ambient_size();
  if (g.mat.rows() != a || g.mat.cols() != a) {
    return std::numeric_limits<double>::infinity();
  }
  switch (g.kind.family) {
    case Family::SpecialOrthogonal: {
      const Matrix defect = g.mat.transpose() * g.mat - Matrix::Identity(a, a);
      return defect.norm() + std::abs(g.mat.determinant() - 1.0);
    }
    case Family::SpecialLinear:
      return std::abs(g.mat.determinant() - 1.0);
    case Family::Translation: {
      Matrix deviation = g.mat;
      deviation.topRightCorner(g.kind.n, 1).setZero();
      deviation -= Matrix::Identity(a, a);
      return deviation.norm();
    }
  }
  return std::numeric_limits<double>::infinity();
}

int total_algebra_dim(const GroupTuple& tuple) {
  int total = 0;
  for (const auto& g : tuple) total += g.kind.algebra_dim();
  return total;
}

}  // namespace mlgipm::lie
