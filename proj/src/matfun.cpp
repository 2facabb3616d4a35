// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <string>

namespace mlgipm::matfun {

namespace {

void require_square_finite(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(who) + ": matrix must be square, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!a.allFinite()) {
    throw DomainError(std::string(who) + ": matrix has non-finite entries");
  }
}

// One-norm condition estimate from an already computed LU factorization.
// The explicit inverse is fine at the dense sizes used here.
double condition_from_lu(const Eigen::PartialPivLU<Matrix>& lu, const Matrix& a) {
  const Matrix inv = lu.inverse();
  if (!inv.allFinite()) return std::numeric_limits<double>::infinity();
  const double na = a.cwiseAbs().colwise().sum().maxCoeff();
  const double ni = inv.cwiseAbs().colwise().sum().maxCoeff();
  return na * ni;
}

double one_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade numerator/denominator split for exp: U odd part, V even part,
// so that exp(A) ~ (V - U)^{-1} (V + U).
void exp_pade(const Matrix& a, int degree, Matrix& u, Matrix& v) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  switch (degree) {
    case 3: {
      static constexpr double b[] = {120., 60., 12., 1.};
      u = a * (b[3] * a2 + b[1] * id);
      v = b[2] * a2 + b[0] * id;
      return;
    }
    case 5: {
      static constexpr double b[] = {30240., 15120., 3360., 420., 30., 1.};
      const Matrix a4 = a2 * a2;
      u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[4] * a4 + b[2] * a2 + b[0] * id;
      return;
    }
    case 7: {
      static constexpr double b[] = {17297280., 8648640., 1995840., 277200.,
                                     25200.,    1512.,    56.,      1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
      return;
    }
    case 9: {
      static constexpr double b[] = {17643225600., 8821612800., 2075673600.,
                                     302702400.,   30270240.,   2162160.,
                                     110880.,      3960.,       90.,
                                     1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      const Matrix a8 = a6 * a2;
      u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
      return;
    }
    default: {  // degree 13
      static constexpr double b[] = {64764752532480000., 32382376266240000.,
                                     7771770303897600.,  1187353796428800.,
                                     129060195264000.,   10559470521600.,
                                     670442572800.,      33522128640.,
                                     1323241920.,        40840800.,
                                     960960.,            16380.,
                                     182.,               1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
               b[5] * a4 + b[3] * a2 + b[1] * id);
      v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
          b[2] * a2 + b[0] * id;
      return;
    }
  }
}

// Principal square root by the product form of the Denman-Beavers iteration.
Matrix sqrtm_db(const Matrix& a, const Options& opts) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix y = a;
  Matrix m = a;
  for (int it = 0; it < opts.logm_max_db_iters; ++it) {
    if (one_norm(m - id) <= opts.logm_sqrt_tol) return y;
    Eigen::PartialPivLU<Matrix> lu(m);
    const Matrix minv = lu.inverse();
    if (!minv.allFinite()) {
      throw NumericalError("logm: square-root iteration hit a singular intermediate "
                           "(iteration " + std::to_string(it) + ")");
    }
    y = 0.5 * (y * (id + minv));
    m = 0.5 * (id + 0.5 * (m + minv));
  }
  if (one_norm(m - id) <= std::sqrt(opts.logm_sqrt_tol)) return y;  // stalled but usable
  throw NumericalError("logm: Denman-Beavers square root did not converge within " +
                       std::to_string(opts.logm_max_db_iters) + " iterations, residual " +
                       std::to_string(one_norm(m - id)));
}

// 8-point Gauss-Legendre nodes/weights on [0,1]; the resulting partial
// fraction sum is the diagonal [8/8] Pade approximant of log(I + Y).
constexpr int kLogPadeDegree = 8;
constexpr double kGlNode[kLogPadeDegree] = {
    0.0198550717512319, 0.1016667612931866, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249, 0.7627662049581645, 0.8983332387068134, 0.9801449282487681};
constexpr double kGlWeight[kLogPadeDegree] = {
    0.0506142681451881, 0.1111905172266872, 0.1568533229389436, 0.1813418916891810,
    0.1813418916891810, 0.1568533229389436, 0.1111905172266872, 0.0506142681451881};

Matrix log_pade(const Matrix& y) {
  const Eigen::Index n = y.rows();
  Matrix r = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  for (int i = 0; i < kLogPadeDegree; ++i) {
    r += kGlWeight[i] * Eigen::PartialPivLU<Matrix>(id + kGlNode[i] * y).solve(y);
  }
  return r;
}

}  // namespace

Matrix expm(const Matrix& a) {
  require_square_finite(a, "expm");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  static constexpr double theta3 = 1.495585217958292e-2;
  static constexpr double theta5 = 2.539398330063230e-1;
  static constexpr double theta7 = 9.504178996162932e-1;
  static constexpr double theta9 = 2.097847961257068e0;
  static constexpr double theta13 = 5.371920351148152e0;

  const double norm = one_norm(a);
  int degree = 13;
  int squarings = 0;
  Matrix scaled = a;
  if (norm <= theta3) {
    degree = 3;
  } else if (norm <= theta5) {
    degree = 5;
  } else if (norm <= theta7) {
    degree = 7;
  } else if (norm <= theta9) {
    degree = 9;
  } else if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    scaled = a / std::ldexp(1.0, squarings);
  }

  Matrix u, v;
  exp_pade(scaled, degree, u, v);
  Matrix f = Eigen::PartialPivLU<Matrix>(v - u).solve(v + u);
  for (int i = 0; i < squarings; ++i) f = f * f;
  return f;
}

Matrix logm(const Matrix& a, const Options& opts) {
  require_square_finite(a, "logm");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  // Principal-branch guard: reject singular matrices and eigenvalues on the
  // closed negative real axis (for rotations that is an angle of exactly pi).
  {
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    const double scale = std::max(1.0, one_norm(a));
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> ev = es.eigenvalues()[i];
      if (std::abs(ev) < 1e-14 * scale) {
        throw DomainError("logm: matrix is numerically singular");
      }
      if (ev.real() < 0.0 && std::abs(ev.imag()) <= 1e-12 * std::abs(ev)) {
        throw DomainError("logm: eigenvalue on the negative real axis (principal branch cut)");
      }
    }
  }

  const Matrix id = Matrix::Identity(n, n);
  Matrix x = a;
  int sqrts = 0;
  while (one_norm(x - id) > 0.25) {
    if (sqrts >= opts.logm_max_sqrts) {
      throw NumericalError("logm: exceeded " + std::to_string(opts.logm_max_sqrts) +
                           " square roots without reaching the Pade region");
    }
    x = sqrtm_db(x, opts);
    ++sqrts;
  }
  return std::ldexp(1.0, sqrts) * log_pade(x - id);
}

SolveResult solve_dense(const Matrix& a, const Vector& b, const Options& opts) {
  require_square_finite(a, "solve_dense");
  if (b.size() != a.rows()) {
    throw DimensionError("solve_dense: rhs length " + std::to_string(b.size()) +
                         " does not match matrix size " + std::to_string(a.rows()));
  }
  if (a.rows() == 0) return {Vector(0), 0.0, false};

  Eigen::PartialPivLU<Matrix> lu(a);
  const double cond = condition_from_lu(lu, a);
  if (cond <= opts.condition_cap) {
    return {lu.solve(b), cond, false};
  }

  const double delta = opts.tikhonov_scale * a.norm();
  const Matrix shifted = a + delta * Matrix::Identity(a.rows(), a.cols());
  Eigen::PartialPivLU<Matrix> lu2(shifted);
  const double cond2 = condition_from_lu(lu2, shifted);
  if (!std::isfinite(cond2) || cond2 > 1.0 / std::numeric_limits<double>::epsilon()) {
    throw SingularError("solve_dense: matrix singular even after Tikhonov shift " +
                        std::to_string(delta));
  }
  Vector x = lu2.solve(b);
  if (!x.allFinite()) {
    throw SingularError("solve_dense: regularized solve produced non-finite values");
  }
  return {std::move(x), cond2, true};
}

}  // namespace mlgipm::matfun
