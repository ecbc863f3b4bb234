#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qpcd/dnn.hpp"
#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"

namespace qpcd {

/// Intercepts tau with phi(e_i / tau_i) = vR - delta along each edge of the vertex cone.
inline Vector tuy_cut(const ReducedProgram& red, double vR, double delta) {
  const double gap = vR - delta - red.v;
  if (!(gap > 0.0)) throw Error(ErrorCode::ReferenceBelowVertex, "vR - delta does not exceed the vertex value");
  const Index r = red.r();
  Vector tau(r);
  for (Index i = 0; i < r; ++i) {
    const double q = red.Q(i, i);
    const double di = red.d(i);
    if (q <= 0.0) {
      tau(i) = 0.0;
      continue;
    }
    const double root = std::sqrt(di * di + q * gap);
    tau(i) = di <= 0.0 ? q / (root - di) : (root + di) / gap;
  }
  return tau;
}

namespace detail {

/// LP over R_tau = {y >= 0 : F'y <= w, tau'y >= 1}.
inline LpProblem tuy_region_lp(const ReducedProgram& red, const Vector& tau, const Vector& c) {
  const Index r = red.r();
  const Index m = red.F.cols();
  LpProblem lp;
  lp.sense = Sense::maximize;
  lp.c = c;
  lp.Aub.resize(m + 1, r);
  lp.Aub.topRows(m) = red.F.transpose();
  lp.Aub.row(m) = -tau.transpose();
  lp.bub.resize(m + 1);
  lp.bub.head(m) = red.w;
  lp.bub(m) = -1.0;
  lp.Aeq = Matrix(0, r);
  lp.beq = Vector(0);
  return lp;
}

inline LpSolution solve_tuy_region(LpSolver& solver, const ReducedProgram& red, const Vector& tau, const Vector& c) {
  LpSolution s = solver.solve(tuy_region_lp(red, tau, c));
  if (s.status == LpStatus::infeasible) throw Error(ErrorCode::TuyRegionEmpty, "R_tau is empty");
  if (s.status == LpStatus::unbounded) throw Error(ErrorCode::SubproblemUnbounded, "LP over R_tau is unbounded");
  return s;
}

}  // namespace detail

/// max{lambda Q_i'y + d'y + lambda d_i + v : y in R_tau} and a maximizer.
inline std::pair<double, Vector> g_value(const ReducedProgram& red, const Vector& tau, double lambda, Index i) {
  LpSolver solver;
  const Vector c = lambda * red.Q.col(i) + red.d;
  const LpSolution s = detail::solve_tuy_region(solver, red, tau, c);
  return {s.objective + lambda * red.d(i) + red.v, s.x};
}

/// Konno bound max_i g(e_i / theta_i); infinite when a coordinate with theta_i = 0 is unbounded.
inline double phi_K(const ReducedProgram& red, const Vector& tau, const Vector& theta) {
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < red.r(); ++i) {
    if (theta(i) <= 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, g_value(red, tau, 1.0 / theta(i), i).first);
  }
  return best;
}

struct LowerBoundResult {
  double lb = -std::numeric_limits<double>::infinity();
  Vector witness;
};

inline LowerBoundResult improve_lower_bound(const ReducedProgram& red, const Vector& tau) {
  LpSolver solver;
  LowerBoundResult out;
  const Index r = red.r();
  for (Index i = 0; i < r; ++i) {
    const Vector c = tau(i) > 0.0 ? Vector(red.Q.col(i) / tau(i) + red.d) : Vector(red.Q.col(i));
    const LpSolution s = detail::solve_tuy_region(solver, red, tau, c);
    const double val = evaluate_reduced(red, s.x);
    if (out.witness.size() == 0 || val > out.lb) {
      out.lb = val;
      out.witness = s.x;
    }
  }
  if (r == 0) detail::solve_tuy_region(solver, red, tau, Vector(0));
  return out;
}

struct KonnoDiagnostics {
  int lp_reciprocal = 0;
  int bisection = 0;
  int unbounded_direction = 0;
  int clamped_to_tau = 0;
};

/// Konno cut coefficients: theta_i = 1 / lambda_i where g(lambda_i e_i) = vR - delta.
/// A zero entry marks a direction along which g never reaches the target.
inline Vector konno_cut(const ReducedProgram& red, double vR, const Vector& tau, double delta,
                        KonnoDiagnostics* diag = nullptr) {
  const Index r = red.r();
  const Index m = red.F.cols();
  const double target = vR - delta;
  const double gap = target - red.v;
  if (!(gap > 0.0)) throw Error(ErrorCode::ReferenceBelowVertex, "vR - delta does not exceed the vertex value");
  const double tol = 1e-7 * std::max(1.0, std::abs(target));
  LpSolver solver;
  auto g = [&](double lambda, Index i) {
    const Vector c = lambda * red.Q.col(i) + red.d;
    return detail::solve_tuy_region(solver, red, tau, c).objective + lambda * red.d(i) + red.v;
  };
  Vector theta(r);
  for (Index i = 0; i < r; ++i) {
    LpProblem lp;
    lp.sense = Sense::minimize;
    lp.c = Vector::Zero(r + 1);
    lp.c.head(r) = -red.d;
    lp.c(r) = gap;
    lp.Aub = Matrix::Zero(m + 1, r + 1);
    lp.Aub.block(0, 0, m, r) = red.F.transpose();
    lp.Aub.block(0, r, m, 1) = -red.w;
    lp.Aub.block(m, 0, 1, r) = -tau.transpose();
    lp.Aub(m, r) = 1.0;
    lp.bub = Vector::Zero(m + 1);
    lp.Aeq = Matrix::Zero(1, r + 1);
    lp.Aeq.block(0, 0, 1, r) = red.Q.col(i).transpose();
    lp.Aeq(0, r) = red.d(i);
    lp.beq = Vector::Ones(1);
    const LpSolution s = solver.solve(lp);
    double lambda = -1.0;
    if (s.status == LpStatus::optimal && s.objective > 0.0) {
      const double gl = g(s.objective, i);
      if (std::abs(gl - target) <= tol) {
        lambda = s.objective;
        if (diag) ++diag->lp_reciprocal;
      }
    }
    if (lambda < 0.0) {
      double lo = 0.0;
      double hi = std::max(1.0, s.status == LpStatus::optimal && s.objective > 0 ? s.objective : 1.0);
      bool bracketed = false;
      for (int k = 0; k < 200; ++k) {
        if (g(hi, i) >= target) {
          bracketed = true;
          break;
        }
        lo = hi;
        hi *= 4.0;
        if (!std::isfinite(hi) || hi > 1e30) break;
      }
      if (!bracketed) {
        theta(i) = 0.0;
        if (diag) ++diag->unbounded_direction;
        continue;
      }
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid, i) >= target) hi = mid; else lo = mid;
      }
      lambda = lo;
      if (diag) ++diag->bisection;
    }
    theta(i) = 1.0 / lambda;
    if (tau(i) > 0.0 && theta(i) > tau(i)) {
      if (std::abs(g(1.0 / tau(i), i) - target) <= tol) {
        theta(i) = tau(i);
        if (diag) ++diag->clamped_to_tau;
      }
    }
  }
  return theta;
}

/// Extended LP bound over R_tau intersected with the simplex {theta'y <= 1}.
inline double phi_L(const ReducedProgram& red, const Vector& tau, const Vector& theta_in) {
  const Index r = red.r();
  const Index m = red.F.cols();
  Vector theta = theta_in;
  const double tmax = theta.size() ? theta.maxCoeff() : 0.0;
  for (Index i = 0; i < r; ++i)
    if (theta(i) <= 0.0) theta(i) = 1e-12 * (tmax > 0 ? tmax : 1.0);
  // Variable layout: L0 (r), L (r x m, row-major), Lm1 (r), a0, a (m), beta.
  const Index oL0 = 0, oL = r, oLm1 = r + r * m, oa0 = oLm1 + r, oa = oa0 + 1, ob = oa + m;
  const Index nv = ob + 1;
  const Index ntri = r * (r + 1) / 2;
  LpProblem lp;
  lp.sense = Sense::minimize;
  lp.c = Vector::Zero(nv);
  lp.c(oa0) = -1.0;
  lp.c.segment(oa, m) = red.w;
  lp.c(ob) = 1.0;
  lp.Aub = Matrix::Zero(ntri + r, nv);
  lp.bub = Vector::Zero(ntri + r);
  Index row = 0;
  for (Index a = 0; a < r; ++a) {
    for (Index b = a; b < r; ++b, ++row) {
      lp.Aub(row, oL0 + a) += tau(b);
      lp.Aub(row, oL0 + b) += tau(a);
      for (Index j = 0; j < m; ++j) {
        lp.Aub(row, oL + a * m + j) -= red.F(b, j);
        lp.Aub(row, oL + b * m + j) -= red.F(a, j);
      }
      lp.Aub(row, oLm1 + a) -= theta(b);
      lp.Aub(row, oLm1 + b) -= theta(a);
      lp.bub(row) = -red.Q(a, b);
    }
  }
  for (Index a = 0; a < r; ++a, ++row) {
    lp.Aub(row, oL0 + a) = -2.0;
    for (Index j = 0; j < m; ++j) lp.Aub(row, oL + a * m + j) = 2.0 * red.w(j);
    lp.Aub(row, oLm1 + a) = 2.0;
    lp.Aub(row, oa0) = tau(a);
    for (Index j = 0; j < m; ++j) lp.Aub(row, oa + j) = -red.F(a, j);
    lp.Aub(row, ob) = -theta(a);
    lp.bub(row) = -2.0 * red.d(a);
  }
  lp.Aeq = Matrix(0, nv);
  lp.beq = Vector(0);
  const LpSolution s = solve_lp(lp);
  if (s.status == LpStatus::unbounded) return -std::numeric_limits<double>::infinity();
  if (s.status == LpStatus::infeasible) throw Error(ErrorCode::NumericalBreakdown, "extended LP bound infeasible");
  return s.objective + red.v;
}

struct DnnCutSettings {
  double eta = 0.5;
  int bisection_rounds = 1;
  SdpSettings sdp;
  const SdpObserver* observer = nullptr;
};

enum class DnnCutPath { lp_bound, dnn_bound, fallback };

struct DnnCutResult {
  Vector theta;
  DnnCutPath path = DnnCutPath::fallback;
};

/// Deepens a Konno cut by shrinking theta when a relaxation certifies the enlarged region.
inline DnnCutResult dnn_cut(const ReducedProgram& red, double vR, const Vector& tau, const Vector& theta_K,
                            double delta, const DnnCutSettings& settings) {
  const double target = vR - delta;
  const Index r = red.r();
  Vector base = theta_K;
  const double tmax = base.size() ? base.maxCoeff() : 0.0;
  for (Index i = 0; i < r; ++i)
    if (base(i) <= 0.0) base(i) = 1e-12 * (tmax > 0 ? tmax : 1.0);
  DnnCutResult out{theta_K, DnnCutPath::fallback};
  Vector cand = settings.eta * base;
  const int rounds = std::max(1, std::min(settings.bisection_rounds, 5));
  for (int round = 0; round < rounds; ++round) {
    bool accepted = false;
    try {
      if (phi_L(red, tau, cand) <= target) {
        out = {cand, DnnCutPath::lp_bound};
        accepted = true;
      } else {
        const ValidBound vb = dnn_bound_region(red, &tau, &cand, settings.sdp, settings.observer);
        if (vb.upper <= target) {
          out = {cand, DnnCutPath::dnn_bound};
          accepted = true;
        }
      }
    } catch (const Error&) {
      accepted = false;
    }
    if (accepted) break;
    cand = 0.5 * (cand + base);
  }
  return out;
}

struct RelativeImprovement {
  double ri_L = 0.0;
  double ri = 0.0;
};

inline RelativeImprovement relative_improvement(double phiK, double phiL, double phiD) {
  if (phiK == 0.0) throw Error(ErrorCode::DivisionByZero, "relative improvement undefined for phiK = 0");
  return {(phiK - phiL) / phiK, (phiK - phiD) / phiK};
}

}  // namespace qpcd
