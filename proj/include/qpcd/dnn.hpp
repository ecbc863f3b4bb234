#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"
#include "qpcd/numlin.hpp"

namespace qpcd {

/// Shor relaxation of max y'Qy + 2d'y + v over F'y <= w, y >= 0 in the homogenized
/// variable Yhat = [[Y, y], [y', 1]]. Constraint pairs (i, j), 0 <= i < j <= r + m, index the
/// linear forms 1, y_1..y_r, w_1 - F_1'y, ..., w_m - F_m'y; row k of `forms` holds form k
/// so that <W(i,j), Yhat> = -2 (forms * Yhat * forms')_{ij}.
struct ShorProblem {
  Index dim = 0;
  Matrix Qhat;
  Matrix F;
  Vector w;
  double tstar = 0.0;
  Matrix forms;

  Index r() const { return dim - 1; }
  Index num_forms() const { return forms.rows(); }

  Matrix W0() const {
    Matrix out = Matrix::Zero(dim, dim);
    out(dim - 1, dim - 1) = 1.0;
    return out;
  }

  /// Constraint matrix for the pair (i, j), built from the block table.
  Matrix W(Index i, Index j) const {
    if (i < 0 || j <= i || j >= num_forms()) throw Error(ErrorCode::InvalidArgument, "W index pair out of range");
    const Index rr = r();
    Matrix out = Matrix::Zero(dim, dim);
    auto Ft = [&](Index k) { return Vector(F.col(k - rr - 1)); };
    auto wt = [&](Index k) { return w(k - rr - 1); };
    if (i == 0 && j <= rr) {
      out(j - 1, rr) = -1.0;
      out(rr, j - 1) = -1.0;
    } else if (i == 0) {
      out.block(0, rr, rr, 1) = Ft(j);
      out.block(rr, 0, 1, rr) = Ft(j).transpose();
      out(rr, rr) = -2.0 * wt(j);
    } else if (j <= rr) {
      out(i - 1, j - 1) -= 1.0;
      out(j - 1, i - 1) -= 1.0;
    } else if (i <= rr) {
      const Vector f = Ft(j);
      out.col(i - 1).head(rr) += f;
      out.row(i - 1).head(rr) += f.transpose();
      out(i - 1, rr) = -wt(j);
      out(rr, i - 1) = -wt(j);
    } else {
      const Vector fi = Ft(i);
      const Vector fj = Ft(j);
      out.topLeftCorner(rr, rr) = -(fj * fi.transpose() + fi * fj.transpose());
      const Vector border = wt(i) * fj + wt(j) * fi;
      out.block(0, rr, rr, 1) = border;
      out.block(rr, 0, 1, rr) = border.transpose();
      out(rr, rr) = -2.0 * wt(i) * wt(j);
    }
    return out;
  }
};

/// Approximate primal-dual pair. `lambda` is symmetric over form pairs with zero diagonal.
struct SdpSolution {
  Matrix Yhat;
  Matrix lambda;
  double nu = 0.0;
  double eps = 0.0;
  double objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ValidBound {
  double upper = std::numeric_limits<double>::infinity();
  double nu = 0.0;
  double eps = 0.0;
  double tstar = 0.0;
};

struct SdpSettings {
  double tol = 1e-6;
  int max_iter = 20000;
  double over_relaxation = 1.6;
  int rebalance_every = 100;
  double rebalance_ratio = 10.0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SdpEvent {
  const Matrix& Q;
  const Vector& d;
  double v;
  const Matrix& F;
  const Vector& w;
  const ValidBound& bound;
};

using SdpObserver = std::function<void(const SdpEvent&)>;

namespace detail {
inline std::uint64_t& sdp_call_counter() {
  thread_local std::uint64_t count = 0;
  return count;
}
}  // namespace detail

/// Number of SDP solves performed on the calling thread.
inline std::uint64_t sdp_calls_on_thread() { return detail::sdp_call_counter(); }

inline Matrix bordered_objective(const Matrix& Q, const Vector& d, double v) {
  const Index r = Q.rows();
  Matrix out(r + 1, r + 1);
  out.topLeftCorner(r, r) = Q;
  out.block(0, r, r, 1) = d;
  out.block(r, 0, 1, r) = d.transpose();
  out(r, r) = v;
  return out;
}

inline ShorProblem assemble_shor(const Matrix& Q, const Vector& d, double v, const Matrix& F, const Vector& w,
                                 std::optional<double> tstar = std::nullopt) {
  const Index r = Q.rows();
  const Index m = F.cols();
  if (F.rows() != r || w.size() != m || d.size() != r) throw Error(ErrorCode::DimensionMismatch, "reduced data sizes");
  ShorProblem prob;
  prob.dim = r + 1;
  prob.Qhat = bordered_objective(Q, d, v);
  prob.F = F;
  prob.w = w;
  prob.forms = Matrix::Zero(1 + r + m, r + 1);
  prob.forms(0, r) = 1.0;
  for (Index i = 0; i < r; ++i) prob.forms(1 + i, i) = 1.0;
  for (Index j = 0; j < m; ++j) {
    prob.forms.block(1 + r + j, 0, 1, r) = -F.col(j).transpose();
    prob.forms(1 + r + j, r) = w(j);
  }
  if (tstar) {
    prob.tstar = *tstar;
  } else {
    prob.tstar = compute_tstar(F, w).value;
  }
  return prob;
}

inline ShorProblem assemble_shor(const ReducedProgram& red) { return assemble_shor(red.Q, red.d, red.v, red.F, red.w); }

/// Recomputes the three residuals for a normalized PSD Yhat and multipliers (lambda <= 0, nu).
inline void measure_certificate(const ShorProblem& prob, SdpSolution& sol) {
  const Matrix& M = prob.forms;
  const Matrix X = M * sol.Yhat * M.transpose();
  double pinf = 0.0;
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < j; ++i) pinf = std::max(pinf, -2.0 * X(i, j));
  Matrix S = prob.Qhat - M.transpose() * sol.lambda * M;
  S(prob.dim - 1, prob.dim - 1) -= sol.nu;
  const double dinf = std::max(0.0, lambda_max(symmetrize(S)));
  sol.objective = (prob.Qhat.cwiseProduct(sol.Yhat)).sum();
  sol.primal_infeasibility = pinf;
  sol.dual_infeasibility = dinf;
  sol.gap = std::abs(sol.objective - sol.nu);
  sol.eps = std::max({pinf, dinf, sol.gap});
}

inline ValidBound certify_upper_bound(const SdpSolution& sol, double tstar) {
  ValidBound b;
  b.nu = sol.nu;
  b.eps = sol.eps;
  b.tstar = tstar;
  b.upper = std::isfinite(tstar) ? sol.nu + sol.eps * (1.0 + tstar * tstar) : std::numeric_limits<double>::infinity();
  return b;
}

namespace detail {

/// max y_i over {y : forms * (y, 1) >= 0}; 1 where the LP gives no usable range.
inline Vector coordinate_ranges(const Matrix& forms) {
  const Index r = forms.cols() - 1;
  Vector D = Vector::Ones(r + 1);
  LpProblem lp;
  lp.Aub = -forms.leftCols(r);
  lp.bub = forms.col(r);
  lp.Aeq = Matrix(0, r);
  lp.beq = Vector(0);
  for (Index i = 0; i < r; ++i) {
    lp.c = Vector::Zero(r);
    lp.c(i) = 1.0;
    try {
      const LpSolution so = solve_lp(lp);
      if (so.status == LpStatus::optimal && so.objective > 1e-9 && std::isfinite(so.objective)) D(i) = so.objective;
    } catch (const Error&) {
    }
  }
  return D;
}

}  // namespace detail

/// ADMM on: max <C, Z> s.t. Z = V psd, X = M D Z D M' with X_00 = 1 and off-diagonal X >= 0,
/// where Yhat = D Z D and D holds the coordinate ranges.
inline SdpSolution solve_dnn(const ShorProblem& prob, const SdpSettings& settings) {
  ++detail::sdp_call_counter();
  const Index k = prob.dim;
  const Index L = prob.num_forms();
  const Vector D = detail::coordinate_ranges(prob.forms);
  const Matrix MD = prob.forms * D.asDiagonal();
  Vector s = Vector::Ones(L);
  for (Index a = 0; a < L; ++a) {
    const double nrm = MD.row(a).norm();
    if (nrm > 0) s(a) = 1.0 / nrm;
  }
  const Matrix Ms = s.asDiagonal() * MD;
  const Matrix QD = D.asDiagonal() * prob.Qhat * D.asDiagonal();
  const double cs = std::max(1.0, QD.cwiseAbs().maxCoeff());
  const double ctol = settings.tol * std::max(1.0, prob.Qhat.cwiseAbs().maxCoeff());
  const Matrix C = QD / cs;
  const SymEig ge = eig_sym(Ms.transpose() * Ms);
  const Matrix& P = ge.vectors;
  const Vector gamma = ge.values.cwiseMax(0.0);
  Matrix denom(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) denom(a, b) = 1.0 + gamma(a) * gamma(b);

  Matrix V = Matrix::Zero(k, k);
  V(k - 1, k - 1) = 1.0;
  Matrix X = Ms * V * Ms.transpose();
  Matrix U1 = Matrix::Zero(k, k);
  Matrix U2 = Matrix::Zero(L, L);
  double rho = 1.0;
  const double alpha = settings.over_relaxation;
  const int check_every = k > 60 ? 20 : 10;

  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  bool have_best = false;
  double rp = 0.0, rd = 0.0;

  auto make_candidate = [&](SdpSolution& cand) -> bool {
    const double corner = V(k - 1, k - 1);
    if (!(corner > 1e-10)) return false;
    cand.Yhat = symmetrize(D.asDiagonal() * V * D.asDiagonal() / corner);
    Matrix lam = Matrix::Zero(L, L);
    for (Index b = 0; b < L; ++b)
      for (Index a = 0; a < L; ++a)
        if (a != b) lam(a, b) = std::min(0.0, cs * rho * U2(a, b) * s(a) * s(b));
    cand.lambda = symmetrize(lam);
    cand.nu = cs * rho * U2(0, 0);
    measure_certificate(prob, cand);
    return true;
  };

  int it = 0;
  for (; it < settings.max_iter; ++it) {
    const Matrix R = V - U1 + Ms.transpose() * (X - U2) * Ms + C / rho;
    const Matrix Y = P * ((P.transpose() * R * P).cwiseQuotient(denom)) * P.transpose();
    const Matrix AY = Ms * Y * Ms.transpose();
    const Matrix Yh = alpha * Y + (1.0 - alpha) * V;
    const Matrix Ah = alpha * AY + (1.0 - alpha) * X;
    const Matrix Vn = psd_project(symmetrize(Yh + U1));
    Matrix Z = Ah + U2;
    Matrix Xn = Z.cwiseMax(0.0);
    for (Index a = 1; a < L; ++a) Xn(a, a) = Z(a, a);
    Xn(0, 0) = 1.0;
    U1 += Yh - Vn;
    U2 = Z - Xn;
    const bool rebalance_now = (it + 1) % settings.rebalance_every == 0;
    const bool check_now = (it + 1) % check_every == 0 || it + 1 == settings.max_iter;
    if (rebalance_now || check_now) {
      rp = std::sqrt((Y - Vn).squaredNorm() + (AY - Xn).squaredNorm());
      rd = rho * std::sqrt((Vn - V).squaredNorm() + (Ms.transpose() * (Xn - X) * Ms).squaredNorm());
    }
    V = Vn;
    X = Xn;
    if (check_now) {
      SdpSolution cand;
      if (make_candidate(cand)) {
        cand.iterations = it + 1;
        const double score = std::isfinite(prob.tstar) ? cand.nu + cand.eps * (1.0 + prob.tstar * prob.tstar) : cand.eps;
        const bool done = cand.primal_infeasibility <= settings.tol &&
                          std::max(cand.dual_infeasibility, cand.gap) <= ctol;
        cand.converged = done;
        if (done || !have_best || score < best_score) {
          best = cand;
          best_score = score;
          have_best = true;
        }
        if (done) break;
      }
      if (settings.deadline && std::chrono::steady_clock::now() > *settings.deadline) break;
    }
    if (rebalance_now && rp > 0 && rd > 0) {
      if (rp > settings.rebalance_ratio * rd) {
        rho *= 2.0;
        U1 /= 2.0;
        U2 /= 2.0;
      } else if (rd > settings.rebalance_ratio * rp) {
        rho /= 2.0;
        U1 *= 2.0;
        U2 *= 2.0;
      }
    }
  }
  if (!have_best) throw Error(ErrorCode::NormalizationFailure, "homogenizing entry vanished");
  best.iterations = std::max(best.iterations, 1);
  return best;
}

inline SdpSolution solve_dnn(const ShorProblem& prob, double tol, int max_iter) {
  SdpSettings st;
  st.tol = tol;
  st.max_iter = max_iter;
  return solve_dnn(prob, st);
}

/// Certified upper bound over {y >= 0 : F'y <= w, theta'y <= 1, tau'y >= 1}.
inline ValidBound dnn_bound_region(const ReducedProgram& red, const Vector* tau, const Vector* theta,
                                   const SdpSettings& settings, const SdpObserver* observer = nullptr) {
  const Index r = red.r();
  const Index extra = (theta ? 1 : 0) + (tau ? 1 : 0);
  Matrix F(r, red.F.cols() + extra);
  Vector w(red.w.size() + extra);
  F.leftCols(red.F.cols()) = red.F;
  w.head(red.w.size()) = red.w;
  Index col = red.F.cols();
  if (theta) {
    F.col(col) = *theta;
    w(col++) = 1.0;
  }
  if (tau) {
    F.col(col) = -*tau;
    w(col++) = -1.0;
  }
  ValidBound bound;
  const TstarResult ts = compute_tstar(F, w);
  if (ts.status == TstarStatus::infeasible) {
    bound.upper = -std::numeric_limits<double>::infinity();
    bound.tstar = ts.value;
  } else if (ts.status == TstarStatus::unbounded) {
    bound.tstar = ts.value;
  } else {
    const ShorProblem prob = assemble_shor(red.Q, red.d, red.v, F, w, ts.value);
    try {
      bound = certify_upper_bound(solve_dnn(prob, settings), ts.value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NormalizationFailure) throw;
      bound.tstar = ts.value;
    }
  }
  if (observer && *observer) (*observer)(SdpEvent{red.Q, red.d, red.v, F, w, bound});
  return bound;
}

/// Moment matrix over (y, slacks, 1) built from a Shor solution (Y, y).
inline Matrix lemma1_lift(const Matrix& Y, const Vector& y, const Matrix& F, const Vector& w) {
  const Index r = Y.rows();
  const Index m = F.cols();
  const Index n = r + m + 1;
  Matrix X(n, n);
  const Matrix YF = Y * F;
  const Vector Fty = F.transpose() * y;
  X.topLeftCorner(r, r) = Y;
  X.block(0, r, r, m) = y * w.transpose() - YF;
  X.block(r, 0, m, r) = X.block(0, r, r, m).transpose();
  X.block(0, r + m, r, 1) = y;
  X.block(r + m, 0, 1, r) = y.transpose();
  X.block(r, r, m, m) = F.transpose() * YF - Fty * w.transpose() - w * Fty.transpose() + w * w.transpose();
  X.block(r, r + m, m, 1) = w - Fty;
  X.block(r + m, r, 1, m) = (w - Fty).transpose();
  X(r + m, r + m) = 1.0;
  return X;
}

/// Validates a lifted matrix against nonnegativity, semidefiniteness and the linear constraints;
/// throws FeasibilityViolation naming the failed constraint.
inline void check_lemma1_lift(const Matrix& X, const Matrix& F, const Vector& w, double tol = 1e-7) {
  const Index r = F.rows();
  const Index m = F.cols();
  const Index n = r + m + 1;
  if (X.rows() != n || X.cols() != n) throw Error(ErrorCode::DimensionMismatch, "lifted matrix size");
  if (X.minCoeff() < -tol) throw Error(ErrorCode::FeasibilityViolation, "elementwise nonnegativity");
  if (lambda_min(symmetrize(X)) < -tol) throw Error(ErrorCode::FeasibilityViolation, "positive semidefiniteness");
  Matrix G = Matrix::Zero(m, n);
  G.leftCols(r) = F.transpose();
  G.block(0, r, m, m).setIdentity();
  if ((G * X.col(n - 1) - w).cwiseAbs().maxCoeff() > tol) throw Error(ErrorCode::FeasibilityViolation, "linear equality on last column");
  const Matrix GXG = G * X * G.transpose();
  if ((GXG.diagonal() - w.cwiseProduct(w)).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorCode::FeasibilityViolation, "squared equality on the diagonal");
  if (std::abs(X(n - 1, n - 1) - 1.0) > tol) throw Error(ErrorCode::FeasibilityViolation, "normalization");
}

/// <Hhat, X> with Hhat = [[Q, 0, d], [0, 0, 0], [d', 0, v]].
inline double lemma1_objective(const Matrix& X, const Matrix& Q, const Vector& d, double v) {
  const Index r = Q.rows();
  const Index n = X.rows();
  return (Q.cwiseProduct(X.topLeftCorner(r, r))).sum() + 2.0 * d.dot(X.col(n - 1).head(r)) + v * X(n - 1, n - 1);
}

inline std::string sdp_solution_json(const SdpSolution& sol) {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    if (std::isfinite(x)) os << x; else os << "null";
    return os.str();
  };
  auto mat = [&](const Matrix& m) {
    std::string out = "[";
    for (Index i = 0; i < m.rows(); ++i) {
      out += i ? ", [" : "[";
      for (Index j = 0; j < m.cols(); ++j) out += (j ? ", " : "") + num(m(i, j));
      out += "]";
    }
    return out + "]";
  };
  std::string out = "{\n";
  out += "  \"Yhat\": " + mat(sol.Yhat) + ",\n";
  out += "  \"lambda\": " + mat(sol.lambda) + ",\n";
  out += "  \"nu\": " + num(sol.nu) + ",\n";
  out += "  \"eps\": " + num(sol.eps) + ",\n";
  out += "  \"objective\": " + num(sol.objective) + ",\n";
  out += "  \"iterations\": " + std::to_string(sol.iterations) + "\n}\n";
  return out;
}

}  // namespace qpcd
