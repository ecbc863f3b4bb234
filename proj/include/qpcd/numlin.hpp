#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qpcd/error.hpp"

namespace qpcd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
struct SymEig {
  Vector values;
  Matrix vectors;
};

/// LU factorization with partial pivoting.
class LuFactor {
 public:
  LuFactor() = default;
  explicit LuFactor(const Matrix& a) { factor(a); }

  void factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "LU of non-square matrix");
    const Index n = a.rows();
    lu_ = a;
    perm_.resize(n);
    for (Index i = 0; i < n; ++i) perm_[i] = i;
    for (Index k = 0; k < n; ++k) {
      Index piv = k;
      double best = std::abs(lu_(k, k));
      for (Index i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      double col_scale = 0.0;
      for (Index i = 0; i < n; ++i) col_scale = std::max(col_scale, std::abs(a(i, k)));
      if (best <= 1e-12 * std::max(col_scale, 1e-300) || best == 0.0) {
        throw Error(ErrorCode::SingularMatrix, "pivot below threshold at column " + std::to_string(k));
      }
      if (piv != k) {
        lu_.row(k).swap(lu_.row(piv));
        std::swap(perm_[k], perm_[piv]);
      }
      const double inv = 1.0 / lu_(k, k);
      for (Index i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) * inv;
        lu_(i, k) = f;
        if (f != 0.0) lu_.row(i).tail(n - k - 1).noalias() -= f * lu_.row(k).tail(n - k - 1);
      }
    }
  }

  Matrix solve(const Matrix& rhs) const {
    const Index n = lu_.rows();
    if (rhs.rows() != n) throw Error(ErrorCode::DimensionMismatch, "LU solve rhs rows");
    Matrix x(n, rhs.cols());
    for (Index i = 0; i < n; ++i) x.row(i) = rhs.row(perm_[i]);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < i; ++k)
        if (lu_(i, k) != 0.0) x.row(i).noalias() -= lu_(i, k) * x.row(k);
    for (Index i = n - 1; i >= 0; --i) {
      for (Index k = i + 1; k < n; ++k)
        if (lu_(i, k) != 0.0) x.row(i).noalias() -= lu_(i, k) * x.row(k);
      x.row(i) /= lu_(i, i);
    }
    return x;
  }

  /// Solves transpose(A) x = rhs.
  Vector solve_transpose(const Vector& rhs) const {
    const Index n = lu_.rows();
    Vector z = rhs;
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < i; ++k) z(i) -= lu_(k, i) * z(k);
      z(i) /= lu_(i, i);
    }
    for (Index i = n - 1; i >= 0; --i)
      for (Index k = i + 1; k < n; ++k) z(i) -= lu_(k, i) * z(k);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(perm_[i]) = z(i);
    return x;
  }

 private:
  Matrix lu_;
  std::vector<Index> perm_;
};

inline Matrix solve_linear(const Matrix& b, const Matrix& rhs) {
  return LuFactor(b).solve(rhs);
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline SymEig eig_sym(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "eig of non-square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double lambda_max(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver");
  return es.eigenvalues()(m.rows() - 1);
}

inline double lambda_min(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver");
  return es.eigenvalues()(0);
}

inline Matrix psd_project(const Matrix& m) {
  const SymEig e = eig_sym(m);
  const Vector clipped = e.values.cwiseMax(0.0);
  return e.vectors * clipped.asDiagonal() * e.vectors.transpose();
}

/// Row rank via Gaussian elimination with partial pivoting, relative tolerance.
inline Index numerical_rank(const Matrix& a, double rel_tol = 1e-10) {
  Matrix w = a;
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  Index rank = 0;
  for (Index c = 0; c < w.cols() && rank < w.rows(); ++c) {
    Index piv = rank;
    for (Index i = rank + 1; i < w.rows(); ++i)
      if (std::abs(w(i, c)) > std::abs(w(piv, c))) piv = i;
    if (std::abs(w(piv, c)) <= rel_tol * scale) continue;
    w.row(rank).swap(w.row(piv));
    for (Index i = rank + 1; i < w.rows(); ++i) {
      const double f = w(i, c) / w(rank, c);
      w.row(i) -= f * w.row(rank);
    }
    ++rank;
  }
  return rank;
}

}  // namespace qpcd
