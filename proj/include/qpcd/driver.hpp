#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "qpcd/climb.hpp"
#include "qpcd/cuts.hpp"
#include "qpcd/dnn.hpp"
#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"
#include "qpcd/oracle.hpp"

namespace qpcd {

enum class CutMode { konno, dnn };
enum class SolveStatus { answered_ge, answered_lt, gap_closed, time_limit, cut_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::answered_ge: return "answered_ge";
    case SolveStatus::answered_lt: return "answered_lt";
    case SolveStatus::gap_closed: return "gap_closed";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::cut_limit: return "cut_limit";
  }
  return "?";
}

struct SolverParams {
  double eta = 0.5;
  double delta = 1e-6;
  double eps_gap = 1e-6;
  CutMode cut_mode = CutMode::dnn;
  double sdp_tol = 1e-7;
  int sdp_max_iter = 50000;
  double cut_sdp_tol = 1e-6;
  int cut_sdp_max_iter = 20000;
  int dnn_bisection_rounds = 1;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  int max_cuts = 200;
  /// Relative margin above the vertex value used for the cut level in global mode
  /// when the incumbent equals the current vertex value.
  double global_margin = 1e-9;
};

struct SolveReport {
  std::string mode;
  SolveStatus status = SolveStatus::time_limit;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double relgap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int cuts_konno = 0;
  int cuts_dnn = 0;
  std::uint64_t lp_calls = 0;
  std::uint64_t sdp_calls = 0;
  double wall_seconds = 0.0;
  std::optional<Vector> best_point;
};

/// Emitted just before a cut is lifted into the instance.
struct CutEvent {
  const QpInstance& instance;
  const Vector& kkt_x;
  const ReducedProgram& red;
  const Vector& tau;
  const Vector& theta_konno;
  const Vector& theta;
  CutKind kind;
  double target;
};

struct IterationEvent {
  int iteration;
  double lower;
  double upper;
};

struct SolveObserver {
  SdpObserver on_sdp;
  std::function<void(const CutEvent&)> on_cut;
  std::function<void(const IterationEvent&)> on_iteration;
};

inline double relative_gap(double lower, double upper, double eps_gap) {
  if (upper == lower) return 0.0;
  return (upper - lower) / std::max(eps_gap, std::abs(lower));
}

namespace detail {

class SolveRun {
 public:
  SolveRun(const QpInstance& inst, const SolverParams& params, const SolveObserver* observer, const char* mode)
      : inst_(inst), params_(params), observer_(observer), start_(std::chrono::steady_clock::now()) {
    report_.mode = mode;
    lp0_ = lp_calls_on_thread();
    sdp0_ = sdp_calls_on_thread();
    if (std::isfinite(params.time_limit_seconds))
      deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(params.time_limit_seconds));
    top_.tol = params.sdp_tol;
    top_.max_iter = params.sdp_max_iter;
    top_.deadline = deadline_;
    cut_.eta = params.eta;
    cut_.bisection_rounds = params.dnn_bisection_rounds;
    cut_.sdp.tol = params.cut_sdp_tol;
    cut_.sdp.max_iter = params.cut_sdp_max_iter;
    cut_.sdp.deadline = deadline_;
    cut_.observer = sdp_observer();
    cur_ = inst;
  }

  const SdpObserver* sdp_observer() const { return observer_ && observer_->on_sdp ? &observer_->on_sdp : nullptr; }

  bool out_of_time() const { return deadline_ && std::chrono::steady_clock::now() > *deadline_; }

  void raise_lower(double value, const Vector& x_cur) {
    if (value > report_.lower || !report_.best_point) {
      if (value > report_.lower) report_.lower = value;
      report_.best_point = Vector(x_cur.head(inst_.n()));
    }
  }

  void lower_upper(double value) { report_.upper = std::min(report_.upper, value); }

  void notify_iteration() {
    if (observer_ && observer_->on_iteration) observer_->on_iteration({report_.iterations, report_.lower, report_.upper});
  }

  SolveReport finish(SolveStatus status) {
    report_.status = status;
    report_.relgap = relative_gap(report_.lower, report_.upper, params_.eps_gap);
    report_.lp_calls = lp_calls_on_thread() - lp0_;
    report_.sdp_calls = sdp_calls_on_thread() - sdp0_;
    report_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    notify_iteration();
    return report_;
  }

  std::optional<Vector> warm_point() const {
    if (!report_.best_point) return std::nullopt;
    Vector x = Vector::Zero(cur_.n());
    x.head(inst_.n()) = *report_.best_point;
    return x;
  }

  /// Chooses the cut for the current region and lifts it. Returns false when theta vanishes.
  bool add_cut(const KktPoint& kkt, const ReducedProgram& red, const Vector& tau, double vR, double delta) {
    const Vector theta_K = konno_cut(red, vR, tau, delta);
    Vector theta = theta_K;
    CutKind kind = CutKind::konno;
    if (params_.cut_mode == CutMode::dnn && theta_K.size() > 0) {
      const DnnCutResult res = dnn_cut(red, vR, tau, theta_K, delta, cut_);
      if (res.path != DnnCutPath::fallback) {
        theta = res.theta;
        kind = CutKind::dnn;
      }
    }
    if (theta.size() == 0 || theta.maxCoeff() <= 0.0) return false;
    if (observer_ && observer_->on_cut)
      observer_->on_cut(CutEvent{cur_, kkt.x, red, tau, theta_K, theta, kind, vR - delta});
    CutPlane cut{theta, red.nonbasic, kind};
    try {
      cur_ = lift_cut(cur_, cut);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficientAfterCut) throw;
      Index j = 0;
      cut.theta.maxCoeff(&j);
      cut.theta(j) += 1e-10;
      cur_ = lift_cut(cur_, cut);
    }
    if (kind == CutKind::dnn) ++report_.cuts_dnn; else ++report_.cuts_konno;
    return true;
  }

  int cuts() const { return report_.cuts_konno + report_.cuts_dnn; }

  const QpInstance& inst_;
  const SolverParams& params_;
  const SolveObserver* observer_;
  std::chrono::steady_clock::time_point start_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  SdpSettings top_;
  DnnCutSettings cut_;
  QpInstance cur_;
  SolveReport report_;
  std::uint64_t lp0_ = 0;
  std::uint64_t sdp0_ = 0;
};

}  // namespace detail

/// Decides whether the maximum reaches vR.
inline SolveReport solve_reference(const QpInstance& inst, double vR, const SolverParams& params = {},
                                   const SolveObserver* observer = nullptr) {
  detail::SolveRun run(inst, params, observer, "ref");
  auto& rep = run.report_;
  double delta = params.delta;
  for (int iter = 0;; ++iter) {
    rep.iterations = iter + 1;
    if (iter > 0) run.notify_iteration();
    if (run.out_of_time()) return run.finish(SolveStatus::time_limit);
    try {
      KktPoint kkt;
      ReducedProgram red;
      try {
        std::tie(kkt, red) = kkt_with_minimal_program(run.cur_, run.warm_point());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InfeasibleRegion) throw;
        run.lower_upper(vR - delta);
        return run.finish(SolveStatus::answered_lt);
      }
      run.raise_lower(kkt.phi, kkt.x);
      if (kkt.phi >= vR) return run.finish(SolveStatus::answered_ge);
      const ValidBound t = dnn_bound_region(red, nullptr, nullptr, run.top_, run.sdp_observer());
      if (t.upper < vR) {
        run.lower_upper(std::max(vR - delta, t.upper));
        return run.finish(SolveStatus::answered_lt);
      }
      run.lower_upper(t.upper);
      delta = std::min(delta, (vR - rep.lower) / 2.0);
      const Vector tau = tuy_cut(red, vR, delta);
      LowerBoundResult lb;
      try {
        lb = improve_lower_bound(red, tau);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TuyRegionEmpty) throw;
        run.lower_upper(vR - delta);
        return run.finish(SolveStatus::answered_lt);
      }
      if (lb.witness.size() > 0 && lb.lb > rep.lower) run.raise_lower(lb.lb, assemble_x(red, lb.witness));
      if (rep.lower >= vR) return run.finish(SolveStatus::answered_ge);
      delta = std::min(delta, (vR - rep.lower) / 2.0);
      if (run.cuts() >= params.max_cuts) return run.finish(SolveStatus::cut_limit);
      if (!run.add_cut(kkt, red, tau, vR, delta)) {
        run.lower_upper(vR - delta);
        return run.finish(SolveStatus::answered_lt);
      }
    } catch (const Error&) {
      return run.finish(SolveStatus::time_limit);
    }
  }
}

/// Maximizes to a relative gap using the incumbent as a moving reference value.
inline SolveReport solve_global(const QpInstance& inst, const SolverParams& params = {},
                                const SolveObserver* observer = nullptr) {
  detail::SolveRun run(inst, params, observer, "global");
  auto& rep = run.report_;
  double cut_level = -std::numeric_limits<double>::infinity();
  auto closed = [&] {
    return std::isfinite(rep.lower) && rep.upper - rep.lower <= params.eps_gap * std::max(std::abs(rep.lower), params.eps_gap);
  };
  auto close_at = [&](double level) {
    run.lower_upper(std::max({rep.lower, cut_level, level}));
    return run.finish(SolveStatus::gap_closed);
  };
  for (int iter = 0;; ++iter) {
    rep.iterations = iter + 1;
    if (iter > 0) run.notify_iteration();
    if (closed()) return run.finish(SolveStatus::gap_closed);
    if (run.out_of_time()) return run.finish(SolveStatus::time_limit);
    try {
      KktPoint kkt;
      ReducedProgram red;
      try {
        std::tie(kkt, red) = kkt_with_minimal_program(run.cur_, run.warm_point());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InfeasibleRegion) throw;
        return close_at(-std::numeric_limits<double>::infinity());
      }
      run.raise_lower(kkt.phi, kkt.x);
      const ValidBound t = dnn_bound_region(red, nullptr, nullptr, run.top_, run.sdp_observer());
      if (t.upper <= rep.lower) return close_at(-std::numeric_limits<double>::infinity());
      run.lower_upper(std::max(t.upper, cut_level));
      if (closed()) return run.finish(SolveStatus::gap_closed);
      const double margin = params.global_margin * std::max(1.0, std::abs(rep.lower));
      const double level = std::max(rep.lower, red.v + margin);
      const Vector tau = tuy_cut(red, level, 0.0);
      LowerBoundResult lb;
      try {
        lb = improve_lower_bound(red, tau);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TuyRegionEmpty) throw;
        return close_at(level);
      }
      if (lb.witness.size() > 0 && lb.lb > rep.lower) run.raise_lower(lb.lb, assemble_x(red, lb.witness));
      const double level2 = std::max(rep.lower, red.v + margin);
      if (run.cuts() >= params.max_cuts) return run.finish(SolveStatus::cut_limit);
      if (!run.add_cut(kkt, red, tau, level2, 0.0)) return close_at(level2);
      cut_level = std::max(cut_level, level2);
    } catch (const Error&) {
      return run.finish(SolveStatus::time_limit);
    }
  }
}

}  // namespace qpcd
