#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qpcd/model.hpp"
#include "qpcd/numlin.hpp"

namespace qpcd {

inline double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

namespace detail {

/// Calls f(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(Index n, Index k, Fn&& f) {
  std::vector<Index> idx(k);
  for (Index i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    f(idx);
    Index i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// All distinct vertices of {x >= 0 : Ax = b} by basis enumeration.
inline std::vector<Vector> enumerate_vertices(const QpInstance& inst, double max_subsets = 1e6) {
  const Index n = inst.n();
  const Index m = inst.m();
  if (n > 16 || binomial(n, m) > max_subsets) throw Error(ErrorCode::TooLarge, "instance too large for basis enumeration");
  std::vector<Vector> out;
  const double scale = std::max(1.0, m ? inst.b.cwiseAbs().maxCoeff() : 0.0);
  detail::for_each_subset(n, m, [&](const std::vector<Index>& basis) {
    Vector x = Vector::Zero(n);
    if (m > 0) {
      const Matrix B = select_columns(inst.A, basis);
      Vector xb;
      try {
        xb = solve_linear(B, inst.b);
      } catch (const Error&) {
        return;
      }
      if (xb.minCoeff() < -1e-9 * scale) return;
      if ((B * xb - inst.b).cwiseAbs().maxCoeff() > 1e-8 * scale) return;
      for (Index k = 0; k < m; ++k) x(basis[k]) = std::max(0.0, xb(k));
    }
    for (const Vector& seen : out)
      if ((seen - x).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff())) return;
    out.push_back(x);
  });
  return out;
}

struct OracleResult {
  double value = -std::numeric_limits<double>::infinity();
  Vector vertex;
};

inline OracleResult oracle_optimum(const QpInstance& inst) {
  const std::vector<Vector> verts = enumerate_vertices(inst);
  if (verts.empty()) throw Error(ErrorCode::Infeasible, "no feasible basis");
  OracleResult best;
  for (const Vector& x : verts) {
    const double v = evaluate_phi(inst, x);
    if (best.vertex.size() == 0 || v > best.value) best = {v, x};
  }
  return best;
}

/// Maximum of y'Qy + 2d'y + v over the bounded polytope {y >= 0 : G y <= h} by enumerating
/// every choice of r active constraints. Returns -infinity when the polytope is empty.
inline double max_over_polytope(const Matrix& Q, const Vector& d, double v, const Matrix& G, const Vector& h,
                                double max_subsets = 2e5) {
  const Index r = Q.rows();
  const Index rows = G.rows();
  const Index total = rows + r;
  if (binomial(total, r) > max_subsets) throw Error(ErrorCode::TooLarge, "polytope too large for enumeration");
  Matrix all(total, r);
  Vector rhs(total);
  all.topRows(rows) = G;
  rhs.head(rows) = h;
  all.bottomRows(r) = -Matrix::Identity(r, r);
  rhs.tail(r).setZero();
  const double scale = std::max(1.0, rows ? h.cwiseAbs().maxCoeff() : 0.0);
  double best = -std::numeric_limits<double>::infinity();
  if (r == 0) {
    if (rows == 0 || h.minCoeff() >= -1e-9 * scale) best = v;
    return best;
  }
  detail::for_each_subset(total, r, [&](const std::vector<Index>& act) {
    Matrix S(r, r);
    Vector t(r);
    for (Index k = 0; k < r; ++k) {
      S.row(k) = all.row(act[k]);
      t(k) = rhs(act[k]);
    }
    Vector y;
    try {
      y = solve_linear(S, t);
    } catch (const Error&) {
      return;
    }
    if ((all * y - rhs).maxCoeff() > 1e-9 * scale * std::max(1.0, y.cwiseAbs().maxCoeff())) return;
    best = std::max(best, y.dot(Q * y) + 2.0 * d.dot(y) + v);
  });
  return best;
}

}  // namespace qpcd
