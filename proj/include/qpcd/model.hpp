#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qpcd/error.hpp"
#include "qpcd/numlin.hpp"

namespace qpcd {

/// Maximize x'Hx + 2p'x subject to Ax = b, x >= 0.
struct QpInstance {
  std::string name;
  Matrix H;
  Vector p;
  Matrix A;
  Vector b;
  std::optional<double> vR;

  Index n() const { return A.cols(); }
  Index m() const { return A.rows(); }
};

/// Data of the problem reduced at a vertex: max y'Qy + 2d'y + v s.t. F'y <= w, y >= 0.
struct ReducedProgram {
  Matrix Q;
  Vector d;
  double v = 0.0;
  Matrix F;
  Vector w;
  std::vector<Index> basic;
  std::vector<Index> nonbasic;

  Index r() const { return Q.rows(); }
};

enum class CutKind { tuy, konno, dnn };

inline const char* to_string(CutKind k) {
  switch (k) {
    case CutKind::tuy: return "tuy";
    case CutKind::konno: return "konno";
    case CutKind::dnn: return "dnn";
  }
  return "?";
}

/// The half-space theta' x_N >= 1.
struct CutPlane {
  Vector theta;
  std::vector<Index> nonbasic;
  CutKind kind = CutKind::konno;
};

inline void check_dimensions(const QpInstance& inst) {
  const Index n = inst.A.cols();
  if (inst.H.rows() != n || inst.H.cols() != n) throw Error(ErrorCode::DimensionMismatch, "H must be n x n");
  if (inst.p.size() != n) throw Error(ErrorCode::DimensionMismatch, "p must have length n");
  if (inst.b.size() != inst.A.rows()) throw Error(ErrorCode::DimensionMismatch, "b must have length m");
}

inline double objective_scale(const QpInstance& inst) {
  double s = 1.0;
  if (inst.H.size() > 0) s = std::max(s, inst.H.cwiseAbs().maxCoeff());
  if (inst.p.size() > 0) s = std::max(s, inst.p.cwiseAbs().maxCoeff());
  return s;
}

inline double evaluate_phi(const QpInstance& inst, const Vector& x) {
  return x.dot(inst.H * x) + 2.0 * inst.p.dot(x);
}

inline double evaluate_psi(const QpInstance& inst, const Vector& x, const Vector& xt) {
  return x.dot(inst.H * xt) + inst.p.dot(x) + inst.p.dot(xt);
}

/// Reduced objective y'Qy + 2d'y + v.
inline double evaluate_reduced(const ReducedProgram& red, const Vector& y) {
  return y.dot(red.Q * y) + 2.0 * red.d.dot(y) + red.v;
}

inline bool is_feasible(const QpInstance& inst, const Vector& x, double eq_tol = 1e-8, double nn_tol = 1e-9) {
  if (x.size() != inst.n()) return false;
  const double scale = std::max(1.0, inst.b.size() ? inst.b.cwiseAbs().maxCoeff() : 0.0);
  if (inst.m() > 0 && (inst.A * x - inst.b).cwiseAbs().maxCoeff() > eq_tol * scale) return false;
  return x.size() == 0 || x.minCoeff() >= -nn_tol;
}

inline std::vector<Index> complement_indices(Index n, const std::vector<Index>& basis) {
  std::vector<char> in(n, 0);
  for (Index j : basis) in[j] = 1;
  std::vector<Index> out;
  for (Index j = 0; j < n; ++j)
    if (!in[j]) out.push_back(j);
  return out;
}

inline Matrix select_columns(const Matrix& a, const std::vector<Index>& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out.col(k) = a.col(idx[k]);
  return out;
}

inline Matrix select_block(const Matrix& a, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  return out;
}

inline Vector select_entries(const Vector& a, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out(k) = a(idx[k]);
  return out;
}

/// Reduction without the feasibility precondition on the vertex.
inline ReducedProgram reduce_at_basis(const QpInstance& inst, const std::vector<Index>& basis) {
  const Index n = inst.n();
  const Index m = inst.m();
  if (static_cast<Index>(basis.size()) != m) throw Error(ErrorCode::DimensionMismatch, "basis must have m entries");
  for (Index j : basis)
    if (j < 0 || j >= n) throw Error(ErrorCode::DimensionMismatch, "basis index out of range");
  ReducedProgram red;
  red.basic = basis;
  red.nonbasic = complement_indices(n, basis);
  const Matrix B = select_columns(inst.A, red.basic);
  const Matrix N = select_columns(inst.A, red.nonbasic);
  LuFactor lu;
  try {
    lu.factor(B);
  } catch (const Error&) {
    throw Error(ErrorCode::SingularBasis, "basis matrix is singular");
  }
  Matrix rhs(m, N.cols() + 1);
  rhs.leftCols(N.cols()) = N;
  rhs.col(N.cols()) = inst.b;
  const Matrix sol = lu.solve(rhs);
  red.F = sol.leftCols(N.cols()).transpose();
  red.w = sol.col(N.cols());
  const Matrix Hbb = select_block(inst.H, red.basic, red.basic);
  const Matrix Hbn = select_block(inst.H, red.basic, red.nonbasic);
  const Matrix Hnn = select_block(inst.H, red.nonbasic, red.nonbasic);
  const Vector pb = select_entries(inst.p, red.basic);
  const Vector pn = select_entries(inst.p, red.nonbasic);
  const Vector Hw = Hbb * red.w;
  red.v = red.w.dot(Hw) + 2.0 * pb.dot(red.w);
  const Matrix FHbn = red.F * Hbn;
  red.Q = symmetrize(Hnn + red.F * Hbb * red.F.transpose() - FHbn - FHbn.transpose());
  red.d = pn + Hbn.transpose() * red.w - red.F * pb - red.F * Hw;
  return red;
}

inline ReducedProgram reduce_at_vertex(const QpInstance& inst, const Vector& vertex, const std::vector<Index>& basis) {
  if (!is_feasible(inst, vertex)) throw Error(ErrorCode::InfeasibleVertex, "vertex violates Ax=b, x>=0");
  ReducedProgram red = reduce_at_basis(inst, basis);
  for (Index j : red.nonbasic)
    if (std::abs(vertex(j)) > 1e-8) throw Error(ErrorCode::InfeasibleVertex, "nonbasic entry of vertex is nonzero");
  return red;
}

/// Maps reduced coordinates back to x: x_N = y, x_B = w - F'y.
inline Vector assemble_x(const ReducedProgram& red, const Vector& y) {
  const Index n = static_cast<Index>(red.basic.size() + red.nonbasic.size());
  Vector x = Vector::Zero(n);
  const Vector xb = red.w - red.F.transpose() * y;
  for (size_t k = 0; k < red.basic.size(); ++k) x(red.basic[k]) = xb(k);
  for (size_t k = 0; k < red.nonbasic.size(); ++k) x(red.nonbasic[k]) = y(k);
  return x;
}

/// Appends the row theta' x_N - s = 1 with a new slack s >= 0.
inline QpInstance lift_cut(const QpInstance& inst, const CutPlane& cut) {
  const Index n = inst.n();
  const Index m = inst.m();
  if (cut.theta.size() != static_cast<Index>(cut.nonbasic.size()))
    throw Error(ErrorCode::DimensionMismatch, "cut coefficients and index list differ in length");
  if (cut.theta.size() == 0 || cut.theta.maxCoeff() <= 0.0 || cut.theta.minCoeff() < 0.0)
    throw Error(ErrorCode::InvalidArgument, "cut needs nonnegative coefficients with a positive entry");
  QpInstance out;
  out.name = inst.name;
  out.vR = inst.vR;
  out.A = Matrix::Zero(m + 1, n + 1);
  out.A.topLeftCorner(m, n) = inst.A;
  for (size_t k = 0; k < cut.nonbasic.size(); ++k) {
    const Index j = cut.nonbasic[k];
    if (j < 0 || j >= n) throw Error(ErrorCode::DimensionMismatch, "cut index out of range");
    out.A(m, j) = cut.theta(k);
  }
  out.A(m, n) = -1.0;
  out.b.resize(m + 1);
  out.b.head(m) = inst.b;
  out.b(m) = 1.0;
  out.H = Matrix::Zero(n + 1, n + 1);
  out.H.topLeftCorner(n, n) = inst.H;
  out.p = Vector::Zero(n + 1);
  out.p.head(n) = inst.p;
  if (numerical_rank(out.A) < m + 1) throw Error(ErrorCode::RankDeficientAfterCut, "cut row is redundant");
  return out;
}

}  // namespace qpcd
