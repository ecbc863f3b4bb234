#include <gtest/gtest.h>

#include "qpcd/climb.hpp"
#include "qpcd/cuts.hpp"
#include "qpcd/generate.hpp"
#include "qpcd/oracle.hpp"
#include "test_support.hpp"

using namespace qpcd;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST(TuyCut, QuadraticIntercept) {
  EXPECT_DOUBLE_EQ(tuy_cut(test::interval(1.0, 0.0, 0.0), 4.0, 0.0)(0), 0.5);
}

TEST(TuyCut, InterceptWithNegativeSlope) {
  EXPECT_NEAR(tuy_cut(test::interval(1.0, -1.0, 0.0), 3.0, 0.0)(0), 1.0 / 3.0, 1e-15);
}

TEST(TuyCut, FlatDirection) {
  EXPECT_EQ(tuy_cut(test::interval(0.0, 0.0, 0.0), 3.0, 0.0)(0), 0.0);
}

TEST(TuyCut, TargetBelowVertexRejected) {
  try {
    tuy_cut(test::interval(1.0, 0.0, 2.0), 2.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ReferenceBelowVertex);
  }
}

TEST(TuyCut, InterceptsReachTarget) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const QpInstance inst = generate_one(Family::cqmax, 8, 60 + s, "tuy");
    const auto [kkt, red] = kkt_with_minimal_program(inst);
    const double target = red.v + 10.0;
    const Vector tau = tuy_cut(red, target, 0.0);
    for (Index i = 0; i < red.r(); ++i) {
      if (tau(i) <= 0.0) continue;
      const Vector y = Vector::Unit(red.r(), i) / tau(i);
      EXPECT_NEAR(evaluate_reduced(red, y), target, 1e-9 * std::max(1.0, std::abs(target)));
    }
  }
}

TEST(GValue, IntervalMaximum) {
  const auto [value, y] = g_value(test::interval(1.0, 0.0, 0.0), scalar(2.0), 1.0, 0);
  EXPECT_NEAR(value, 1.0, 1e-12);
  EXPECT_NEAR(y(0), 1.0, 1e-12);
}

TEST(GValue, ZeroMultiplier) {
  EXPECT_NEAR(g_value(test::interval(1.0, 0.0, 3.0), scalar(2.0), 0.0, 0).first, 3.0, 1e-12);
}

TEST(GValue, EmptyRegion) {
  try {
    g_value(test::interval(1.0, 0.0, 0.0), scalar(0.5), 1.0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TuyRegionEmpty);
  }
}

TEST(LowerBound, IntervalWitness) {
  const LowerBoundResult lb = improve_lower_bound(test::interval(1.0, 0.0, 0.0), scalar(2.0));
  EXPECT_NEAR(lb.lb, 1.0, 1e-12);
  EXPECT_NEAR(lb.witness(0), 1.0, 1e-12);
}

TEST(LowerBound, ZeroObjective) {
  EXPECT_NEAR(improve_lower_bound(test::interval(0.0, 0.0, 2.5), scalar(2.0)).lb, 2.5, 1e-12);
}

TEST(LowerBound, WitnessFeasible) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const QpInstance inst = generate_one(Family::pcqmax, 9, 80 + s, "lb");
    const auto [kkt, red] = kkt_with_minimal_program(inst);
    const Vector tau = tuy_cut(red, red.v + 1.0, 0.0);
    try {
      const LowerBoundResult lb = improve_lower_bound(red, tau);
      EXPECT_LE((red.F.transpose() * lb.witness - red.w).maxCoeff(), 1e-8);
      EXPECT_GE(lb.witness.minCoeff(), -1e-8);
      EXPECT_GE(tau.dot(lb.witness), 1.0 - 1e-8);
      EXPECT_NEAR(lb.lb, evaluate_reduced(red, lb.witness), 1e-9 * std::max(1.0, std::abs(lb.lb)));
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TuyRegionEmpty);
    }
  }
}

TEST(KonnoCut, IntervalQuarter) {
  const Vector theta = konno_cut(test::interval(1.0, 0.0, 0.0), 0.25, scalar(2.0), 0.0);
  EXPECT_NEAR(theta(0), 4.0, 1e-9);
  EXPECT_NEAR(g_value(test::interval(1.0, 0.0, 0.0), scalar(2.0), 0.25, 0).first, 0.25, 1e-12);
}

TEST(KonnoCut, SteeperQuadratic) {
  EXPECT_NEAR(konno_cut(test::interval(4.0, 0.0, 0.0), 0.25, scalar(2.0), 0.0)(0), 16.0, 1e-9);
}

TEST(KonnoCut, NegativeSlope) {
  EXPECT_NEAR(konno_cut(test::interval(1.0, -0.125, 0.0), 0.25, scalar(2.0), 0.0)(0), 7.0 / 3.0, 1e-9);
}

TEST(KonnoCut, VerifiedOnRandomRegions) {
  int checked = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const QpInstance inst = generate_one(s % 2 ? Family::pcqmax : Family::cqmax, 9, 120 + s, "konno");
    const auto [kkt, red] = kkt_with_minimal_program(inst);
    const double target = red.v + 0.05 * std::max(1.0, std::abs(red.v));
    const Vector tau = tuy_cut(red, target, 0.0);
    Vector theta;
    try {
      theta = konno_cut(red, target, tau, 0.0);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TuyRegionEmpty);
      continue;
    }
    for (Index i = 0; i < red.r(); ++i) {
      if (theta(i) <= 0.0) continue;
      const double g = g_value(red, tau, 1.0 / theta(i), i).first;
      if (theta(i) == tau(i)) {
        EXPECT_LE(g, target + 1e-6 * std::max(1.0, std::abs(target)));
      } else {
        EXPECT_NEAR(g, target, 1e-6 * std::max(1.0, std::abs(target)));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(PhiL, ZeroQuadratic) {
  EXPECT_NEAR(phi_L(test::interval(0.0, 0.0, 5.0), scalar(2.0), scalar(1.0)), 5.0, 1e-9);
}

TEST(PhiL, IntervalSandwich) {
  const ReducedProgram red = test::interval(1.0, 0.0, 0.0);
  const double l = phi_L(red, scalar(2.0), scalar(4.0));
  EXPECT_LE(l, phi_K(red, scalar(2.0), scalar(4.0)) + 1e-9);
}

TEST(PhiL, PositiveHomogeneity) {
  const QpInstance inst = generate_one(Family::cqmax, 7, 33, "homog");
  const auto [kkt, red] = kkt_with_minimal_program(inst);
  const double target = red.v + 1.0;
  const Vector tau = tuy_cut(red, target, 0.0);
  const Vector theta = konno_cut(red, target, tau, 0.0);
  ReducedProgram scaled = red;
  scaled.Q *= 3.0;
  scaled.d *= 3.0;
  scaled.v *= 3.0;
  const double base = phi_L(red, tau, theta);
  EXPECT_NEAR(phi_L(scaled, tau, theta), 3.0 * base, 1e-7 * std::max(1.0, std::abs(base)));
}

TEST(DnnCut, IntervalIsSound) {
  const ReducedProgram red = test::interval(1.0, 0.0, 0.0);
  DnnCutSettings st;
  st.sdp.tol = 1e-8;
  const DnnCutResult res = dnn_cut(red, 0.25, scalar(2.0), scalar(4.0), 0.0, st);
  ASSERT_EQ(res.theta.size(), 1);
  EXPECT_GE(res.theta(0), 2.0 - 1e-12);
  EXPECT_LE(res.theta(0), 4.0 + 1e-12);
  // Everything cut away lies in [1/2, 1/theta], where y^2 <= 1/4.
  const double y = 1.0 / res.theta(0);
  EXPECT_LE(y * y, 0.25 + 1e-12);
}

TEST(DnnCut, FallbackKeepsKonnoCut) {
  ReducedProgram red = test::interval(1.0, 0.0, 0.0);
  DnnCutSettings st;
  st.eta = 0.01;
  const DnnCutResult res = dnn_cut(red, 0.25, scalar(2.0), scalar(4.0), 0.0, st);
  if (res.path == DnnCutPath::fallback) EXPECT_EQ(res.theta(0), 4.0);
}

TEST(RelativeImprovement, Equal) {
  const RelativeImprovement ri = relative_improvement(5.0, 5.0, 5.0);
  EXPECT_EQ(ri.ri_L, 0.0);
  EXPECT_EQ(ri.ri, 0.0);
}

TEST(RelativeImprovement, Arithmetic) {
  const RelativeImprovement ri = relative_improvement(10.0, 9.0, 8.0);
  EXPECT_NEAR(ri.ri_L, 0.1, 1e-15);
  EXPECT_NEAR(ri.ri, 0.2, 1e-15);
}

TEST(RelativeImprovement, NegativeStillComputed) {
  const RelativeImprovement ri = relative_improvement(-2.0, -3.0, -4.0);
  EXPECT_NEAR(ri.ri, -1.0, 1e-15);
  EXPECT_THROW(relative_improvement(0.0, 1.0, 1.0), Error);
}
