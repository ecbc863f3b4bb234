#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"

namespace qpcd {

/// A vertex of the feasible set with a basis optimal for the LP with c = Hx + p.
struct KktPoint {
  Vector x;
  double phi = 0.0;
  std::vector<Index> basis;
};

namespace detail {

inline LpProblem vertex_lp(const QpInstance& inst, const Vector& c) {
  LpProblem lp;
  lp.sense = Sense::maximize;
  lp.c = c;
  lp.Aeq = inst.A;
  lp.beq = inst.b;
  lp.Aub = Matrix(0, inst.n());
  lp.bub = Vector(0);
  return lp;
}

inline bool same_point(const Vector& a, const Vector& b) {
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return (a - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

inline LpSolution checked_vertex_lp(LpSolver& solver, const QpInstance& inst, const Vector& c,
                                    const std::vector<Index>& warm = {}) {
  LpSolution s = solver.solve(vertex_lp(inst, c), warm);
  if (s.status == LpStatus::infeasible) throw Error(ErrorCode::InfeasibleRegion, "feasible set is empty");
  if (s.status == LpStatus::unbounded) throw Error(ErrorCode::NumericalBreakdown, "vertex LP unbounded on a bounded region");
  for (Index j : s.basis)
    if (j >= inst.n()) throw Error(ErrorCode::NumericalBreakdown, "vertex LP basis contains a non-structural column");
  return s;
}

}  // namespace detail

/// Mountain climbing: repeated LPs along the gradient until the objective stalls.
inline KktPoint search_kkt_point(const QpInstance& inst, const std::optional<Vector>& x0 = std::nullopt,
                                 int max_iter = 1000) {
  LpSolver solver;
  LpSolution s = x0 ? detail::checked_vertex_lp(solver, inst, inst.H * (*x0) + inst.p)
                    : detail::checked_vertex_lp(solver, inst, Vector::Zero(inst.n()));
  Vector x = s.x;
  std::vector<Index> basis = s.basis;
  double phi = evaluate_phi(inst, x);
  for (int k = 0; k < max_iter; ++k) {
    const Vector c = inst.H * x + inst.p;
    s = detail::checked_vertex_lp(solver, inst, c, basis);
    if (detail::same_point(s.x, x)) return {x, phi, s.basis};
    const double next = evaluate_phi(inst, s.x);
    const double gain = next - phi;
    x = s.x;
    basis = s.basis;
    phi = next;
    if (gain <= 1e-8 * std::max(1.0, std::abs(phi - gain))) return {x, phi, basis};
  }
  return {x, phi, basis};
}

/// Reduction at a basis of kkt.x whose reduced costs certify d <= 0.
inline ReducedProgram minimal_program(const QpInstance& inst, const KktPoint& kkt) {
  if (!is_feasible(inst, kkt.x)) throw Error(ErrorCode::InfeasibleVertex, "KKT point is not feasible");
  LpSolver solver;
  const Vector c = inst.H * kkt.x + inst.p;
  const LpSolution s = detail::checked_vertex_lp(solver, inst, c, kkt.basis);
  if (!detail::same_point(s.x, kkt.x))
    throw Error(ErrorCode::BasisSelectionFailure, "LP optimum moved away from the KKT point");
  ReducedProgram red = reduce_at_vertex(inst, kkt.x, s.basis);
  const double tol = 1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff());
  for (Index i = 0; i < red.d.size(); ++i) {
    if (red.d(i) > tol) throw Error(ErrorCode::BasisSelectionFailure, "reduced cost sign violated");
    red.d(i) = std::min(red.d(i), 0.0);
  }
  red.w = red.w.cwiseMax(0.0);
  return red;
}

/// KKT search followed by minimal program, restarting the climb when the basis check fails.
inline std::pair<KktPoint, ReducedProgram> kkt_with_minimal_program(const QpInstance& inst,
                                                                    const std::optional<Vector>& x0 = std::nullopt,
                                                                    int restarts = 5) {
  KktPoint kkt = search_kkt_point(inst, x0);
  for (int attempt = 0;; ++attempt) {
    try {
      ReducedProgram red = minimal_program(inst, kkt);
      return {kkt, red};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BasisSelectionFailure || attempt >= restarts) throw;
    }
    kkt = search_kkt_point(inst, kkt.x);
  }
}

}  // namespace qpcd
