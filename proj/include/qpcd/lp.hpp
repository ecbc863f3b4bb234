#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qpcd/error.hpp"
#include "qpcd/numlin.hpp"

namespace qpcd {

enum class Sense { maximize, minimize };
enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

/// Optimize c'x subject to Aeq x = beq, Aub x <= bub, x >= lower.
/// Empty `lower` means all zero; -infinity marks a free variable.
struct LpProblem {
  Sense sense = Sense::maximize;
  Vector c;
  Matrix Aeq;
  Vector beq;
  Matrix Aub;
  Vector bub;
  Vector lower;

  Index num_vars() const { return c.size(); }
};

/// Basis indices refer to columns of the internal standard form: variables first,
/// then one slack per inequality row, then negative parts of free variables.
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  std::vector<Index> basis;
  Vector duals;
  int pivots = 0;
};

namespace detail {
inline std::uint64_t& lp_call_counter() {
  thread_local std::uint64_t count = 0;
  return count;
}
}  // namespace detail

/// Number of LP solves performed on the calling thread.
inline std::uint64_t lp_calls_on_thread() { return detail::lp_call_counter(); }

/// Dense two-phase primal simplex on a full tableau.
class LpSolver {
 public:
  LpSolution solve(const LpProblem& prob, const std::vector<Index>& warm_basis = {}) {
    ++detail::lp_call_counter();
    build(prob);
    LpSolution out;
    bool warm = !warm_basis.empty() && try_warm_start(warm_basis);
    if (!warm) {
      cold_start();
      set_phase1_costs();
      const bool ok = run_simplex(true);
      if (!ok) throw Error(ErrorCode::NumericalBreakdown, "phase 1 reported unbounded");
      const double infeas = -obj_value();
      if (infeas > 1e-8 * std::max(1.0, bscale_)) {
        out.status = LpStatus::infeasible;
        out.pivots = pivots_;
        return out;
      }
      drive_out_artificials();
    }
    set_phase2_costs();
    const bool bounded = run_simplex(false);
    out.pivots = pivots_;
    if (!bounded) {
      out.status = LpStatus::unbounded;
      return out;
    }
    refactor();
    extract(prob, out);
    out.status = LpStatus::optimal;
    return out;
  }

 private:
  Index rows_ = 0;
  Index nuser_ = 0;
  Index nslack_ = 0;
  Index nfree_ = 0;
  Index ncols_ = 0;  // structural + slack + free negatives
  Index nart_ = 0;
  Matrix A_;         // rows x (ncols + nart), original data after row sign flips
  Vector b_;
  Vector row_sign_;
  Vector lower_;
  std::vector<Index> free_vars_;
  Vector cost_;
  Matrix T_;         // rows x (ncols + nart + 1)
  Vector rc_;
  std::vector<Index> basis_;
  std::vector<char> allowed_;
  double bscale_ = 1.0;
  double cscale_ = 1.0;
  int pivots_ = 0;
  int since_refactor_ = 0;
  bool bland_ = false;

  Index total_cols() const { return ncols_ + nart_; }

  void build(const LpProblem& prob) {
    nuser_ = prob.num_vars();
    const Index meq = prob.Aeq.rows();
    const Index mub = prob.Aub.rows();
    if ((meq > 0 && prob.Aeq.cols() != nuser_) || prob.beq.size() != meq || (mub > 0 && prob.Aub.cols() != nuser_) ||
        prob.bub.size() != mub || (prob.lower.size() != 0 && prob.lower.size() != nuser_))
      throw Error(ErrorCode::DimensionMismatch, "LP data dimensions are inconsistent");
    rows_ = meq + mub;
    nslack_ = mub;
    lower_ = prob.lower.size() ? prob.lower : Vector::Zero(nuser_);
    free_vars_.clear();
    for (Index j = 0; j < nuser_; ++j)
      if (!std::isfinite(lower_(j))) free_vars_.push_back(j);
    nfree_ = static_cast<Index>(free_vars_.size());
    ncols_ = nuser_ + nslack_ + nfree_;
    nart_ = rows_;
    A_ = Matrix::Zero(rows_, ncols_ + nart_);
    b_.resize(rows_);
    Vector shift = Vector::Zero(nuser_);
    for (Index j = 0; j < nuser_; ++j)
      if (std::isfinite(lower_(j))) shift(j) = lower_(j);
    if (meq > 0) {
      A_.block(0, 0, meq, nuser_) = prob.Aeq;
      b_.head(meq) = prob.beq - prob.Aeq * shift;
    }
    if (mub > 0) {
      A_.block(meq, 0, mub, nuser_) = prob.Aub;
      b_.tail(mub) = prob.bub - prob.Aub * shift;
      for (Index i = 0; i < mub; ++i) A_(meq + i, nuser_ + i) = 1.0;
    }
    for (Index k = 0; k < nfree_; ++k) A_.col(nuser_ + nslack_ + k) = -A_.col(free_vars_[k]);
    row_sign_ = Vector::Ones(rows_);
    for (Index i = 0; i < rows_; ++i) {
      if (b_(i) < 0) {
        row_sign_(i) = -1.0;
        A_.row(i) *= -1.0;
        b_(i) = -b_(i);
      }
      A_(i, ncols_ + i) = 1.0;
    }
    bscale_ = rows_ ? std::max(1.0, b_.cwiseAbs().maxCoeff()) : 1.0;
    cost_ = Vector::Zero(ncols_ + nart_);
    Vector cint = prob.sense == Sense::maximize ? Vector(-prob.c) : Vector(prob.c);
    cost_.head(nuser_) = cint;
    for (Index k = 0; k < nfree_; ++k) cost_(nuser_ + nslack_ + k) = -cint(free_vars_[k]);
    phase2_cost_ = cost_;
    cscale_ = std::max(1.0, nuser_ ? cint.cwiseAbs().maxCoeff() : 0.0);
    pivots_ = 0;
    since_refactor_ = 0;
    bland_ = false;
    allowed_.assign(ncols_ + nart_, 1);
  }

  Vector phase2_cost_;

  void cold_start() {
    basis_.assign(rows_, 0);
    for (Index i = 0; i < rows_; ++i) {
      const Index meq = rows_ - nslack_;
      if (i >= meq && row_sign_(i) > 0)
        basis_[i] = nuser_ + (i - meq);
      else
        basis_[i] = ncols_ + i;
    }
    refactor_tableau_only();
  }

  bool try_warm_start(const std::vector<Index>& wb) {
    if (static_cast<Index>(wb.size()) != rows_) return false;
    std::vector<char> seen(ncols_, 0);
    for (Index j : wb) {
      if (j < 0 || j >= ncols_ || seen[j]) return false;
      seen[j] = 1;
    }
    basis_ = wb;
    try {
      refactor_tableau_only();
    } catch (const Error&) {
      return false;
    }
    for (Index i = 0; i < rows_; ++i)
      if (T_(i, total_cols()) < -1e-9 * bscale_) return false;
    for (Index i = 0; i < rows_; ++i) T_(i, total_cols()) = std::max(0.0, T_(i, total_cols()));
    for (Index k = 0; k < nart_; ++k) allowed_[ncols_ + k] = 0;
    return true;
  }

  void refactor_tableau_only() {
    const Index tc = total_cols();
    T_.resize(rows_, tc + 1);
    if (rows_ == 0) return;
    Matrix B(rows_, rows_);
    for (Index i = 0; i < rows_; ++i) B.col(i) = A_.col(basis_[i]);
    LuFactor lu(B);
    Matrix rhs(rows_, tc + 1);
    rhs.leftCols(tc) = A_;
    rhs.col(tc) = b_;
    T_ = lu.solve(rhs);
    for (Index i = 0; i < rows_; ++i) {
      T_.row(i).head(tc) = T_.row(i).head(tc).unaryExpr([](double v) { return std::abs(v) < 1e-14 ? 0.0 : v; });
      T_(i, basis_[i]) = 1.0;
    }
    since_refactor_ = 0;
  }

  void compute_reduced_costs() {
    const Index tc = total_cols();
    rc_ = cost_;
    for (Index i = 0; i < rows_; ++i) {
      const double cb = cost_(basis_[i]);
      if (cb != 0.0) rc_.noalias() -= cb * T_.row(i).head(tc).transpose();
    }
    for (Index i = 0; i < rows_; ++i) rc_(basis_[i]) = 0.0;
  }

  void refactor() {
    refactor_tableau_only();
    for (Index i = 0; i < rows_; ++i)
      if (T_(i, total_cols()) < 0 && T_(i, total_cols()) > -1e-9 * bscale_) T_(i, total_cols()) = 0.0;
    compute_reduced_costs();
  }

  double obj_value() const {
    double v = 0.0;
    for (Index i = 0; i < rows_; ++i) v += cost_(basis_[i]) * T_(i, total_cols());
    return -v;
  }

  void set_phase1_costs() {
    cost_.setZero();
    for (Index k = 0; k < nart_; ++k) cost_(ncols_ + k) = 1.0;
    compute_reduced_costs();
  }

  void set_phase2_costs() {
    cost_ = phase2_cost_;
    for (Index k = 0; k < nart_; ++k) allowed_[ncols_ + k] = 0;
    compute_reduced_costs();
  }

  void drive_out_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[i] < ncols_) continue;
      Index best = -1;
      double bv = 1e-9;
      for (Index j = 0; j < ncols_; ++j) {
        if (std::find(basis_.begin(), basis_.end(), j) != basis_.end()) continue;
        if (std::abs(T_(i, j)) > bv) {
          bv = std::abs(T_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  void pivot(Index r, Index j) {
    const Index tc = total_cols();
    const double pv = T_(r, j);
    T_.row(r) /= pv;
    for (Index i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, j);
      if (f != 0.0) T_.row(i).noalias() -= f * T_.row(r);
      T_(i, j) = 0.0;
    }
    const double fr = rc_(j);
    if (fr != 0.0) rc_.noalias() -= fr * T_.row(r).head(tc).transpose();
    rc_(j) = 0.0;
    basis_[r] = j;
    ++pivots_;
    if (++since_refactor_ >= 50) refactor();
  }

  /// Returns false when unbounded.
  bool run_simplex(bool phase1) {
    const Index tc = total_cols();
    const double rc_tol = 1e-9 * (phase1 ? 1.0 : cscale_);
    const int degenerate_limit = 3 * static_cast<int>(tc + rows_);
    const int max_pivots = 50 * static_cast<int>(tc + rows_) + 1000;
    int degenerate_run = 0;
    for (;;) {
      if (pivots_ > max_pivots) throw Error(ErrorCode::NumericalBreakdown, "simplex pivot limit exceeded");
      Index enter = -1;
      if (bland_) {
        for (Index j = 0; j < tc; ++j)
          if (allowed_[j] && rc_(j) < -rc_tol) {
            enter = j;
            break;
          }
      } else {
        double best = -rc_tol;
        for (Index j = 0; j < tc; ++j)
          if (allowed_[j] && rc_(j) < best) {
            best = rc_(j);
            enter = j;
          }
      }
      if (enter < 0) {
        if (since_refactor_ > 0) {
          refactor();
          bool again = false;
          for (Index j = 0; j < tc; ++j)
            if (allowed_[j] && rc_(j) < -rc_tol) again = true;
          if (again) continue;
        }
        return true;
      }
      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_piv = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        const double a = T_(i, enter);
        if (a <= 1e-9) continue;
        const double ratio = std::max(0.0, T_(i, tc)) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 * std::max(1.0, best_ratio)) {
          leave = i;
          best_ratio = ratio;
          best_piv = a;
        } else if (ratio <= best_ratio + 1e-12 * std::max(1.0, best_ratio)) {
          const bool take = bland_ ? basis_[i] < basis_[leave] : a > best_piv;
          if (take) {
            leave = i;
            best_ratio = std::min(best_ratio, ratio);
            best_piv = a;
          }
        }
      }
      if (leave < 0) {
        if (since_refactor_ > 0) {
          refactor();
          continue;
        }
        return false;
      }
      if (best_ratio <= 1e-12 * bscale_) {
        if (++degenerate_run > degenerate_limit) bland_ = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
  }

  void extract(const LpProblem& prob, LpSolution& out) const {
    const Index tc = total_cols();
    Vector xs = Vector::Zero(ncols_);
    for (Index i = 0; i < rows_; ++i)
      if (basis_[i] < ncols_) xs(basis_[i]) = std::max(0.0, T_(i, tc));
    out.x.resize(nuser_);
    for (Index j = 0; j < nuser_; ++j) out.x(j) = xs(j) + (std::isfinite(lower_(j)) ? lower_(j) : 0.0);
    for (Index k = 0; k < nfree_; ++k) out.x(free_vars_[k]) -= xs(nuser_ + nslack_ + k);
    out.objective = prob.c.dot(out.x);
    out.basis = basis_;
    out.duals = Vector::Zero(rows_);
    if (rows_ > 0) {
      Matrix B(rows_, rows_);
      Vector cb(rows_);
      for (Index i = 0; i < rows_; ++i) {
        B.col(i) = A_.col(basis_[i]);
        cb(i) = phase2_cost_(basis_[i]);
      }
      const Vector y = LuFactor(B).solve_transpose(cb);
      const double s = prob.sense == Sense::maximize ? -1.0 : 1.0;
      for (Index i = 0; i < rows_; ++i) out.duals(i) = s * y(i) * row_sign_(i);
    }
  }
};

inline LpSolution solve_lp(const LpProblem& prob) {
  LpSolver solver;
  return solver.solve(prob);
}

enum class TstarStatus { finite, unbounded, infeasible };

struct TstarResult {
  TstarStatus status = TstarStatus::finite;
  double value = 0.0;
};

/// max 1'y subject to F'y <= w, y >= 0.
inline TstarResult compute_tstar(const Matrix& F, const Vector& w) {
  LpProblem lp;
  lp.sense = Sense::maximize;
  lp.c = Vector::Ones(F.rows());
  lp.Aub = F.transpose();
  lp.bub = w;
  lp.Aeq = Matrix(0, F.rows());
  lp.beq = Vector(0);
  const LpSolution s = solve_lp(lp);
  if (s.status == LpStatus::infeasible) return {TstarStatus::infeasible, -std::numeric_limits<double>::infinity()};
  if (s.status == LpStatus::unbounded) return {TstarStatus::unbounded, std::numeric_limits<double>::infinity()};
  return {TstarStatus::finite, std::max(0.0, s.objective)};
}

/// Interior radius: min(1, max rho with F'y + rho <= w, y >= rho), clamped at 0.
inline double compute_rho_star(const Matrix& F, const Vector& w) {
  const Index r = F.rows();
  const Index m = F.cols();
  LpProblem lp;
  lp.sense = Sense::maximize;
  lp.c = Vector::Zero(r + 1);
  lp.c(r) = 1.0;
  lp.Aub = Matrix::Zero(m + r + 1, r + 1);
  lp.bub = Vector::Zero(m + r + 1);
  lp.Aub.topLeftCorner(m, r) = F.transpose();
  lp.Aub.block(0, r, m, 1).setOnes();
  lp.bub.head(m) = w;
  for (Index i = 0; i < r; ++i) {
    lp.Aub(m + i, i) = -1.0;
    lp.Aub(m + i, r) = 1.0;
  }
  lp.Aub(m + r, r) = 1.0;
  lp.bub(m + r) = 1.0;
  lp.Aeq = Matrix(0, r + 1);
  lp.beq = Vector(0);
  const LpSolution s = solve_lp(lp);
  if (s.status != LpStatus::optimal) return 0.0;
  return std::clamp(s.objective, 0.0, 1.0);
}

}  // namespace qpcd
