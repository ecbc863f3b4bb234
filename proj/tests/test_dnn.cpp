#include <gtest/gtest.h>

#include "qpcd/climb.hpp"
#include "qpcd/dnn.hpp"
#include "qpcd/generate.hpp"
#include "qpcd/oracle.hpp"
#include "test_support.hpp"

using namespace qpcd;

namespace {

ShorProblem interval_shor() { return assemble_shor(Matrix::Ones(1, 1), Vector::Zero(1), 0.0, Matrix::Ones(1, 1), Vector::Ones(1)); }

Matrix rank_one(const Vector& y) {
  Vector z(y.size() + 1);
  z << y, 1.0;
  return z * z.transpose();
}

}  // namespace

TEST(ShorAssembly, IntervalTable) {
  const ShorProblem p = interval_shor();
  Matrix W01(2, 2), W02(2, 2), W12(2, 2);
  W01 << 0, -1, -1, 0;
  W02 << 0, 1, 1, -2;
  W12 << 2, -1, -1, 0;
  EXPECT_EQ(p.W(0, 1), W01);
  EXPECT_EQ(p.W(0, 2), W02);
  EXPECT_EQ(p.W(1, 2), W12);
  EXPECT_EQ(p.tstar, 1.0);
}

TEST(ShorAssembly, RankOneProducts) {
  const ShorProblem p = interval_shor();
  for (double y : {0.0, 0.25, 0.5, 1.0})
    EXPECT_NEAR((p.W(1, 2).cwiseProduct(rank_one(Vector::Constant(1, y)))).sum(), -2.0 * y * (1.0 - y), 1e-14);
}

TEST(ShorAssembly, FormsAgreeWithTable) {
  const QpInstance inst = generate_one(Family::cqmax, 8, 17, "shor");
  const auto [kkt, red] = kkt_with_minimal_program(inst);
  const ShorProblem p = assemble_shor(red);
  SplitMix64 rng(3);
  Matrix U(p.dim, p.dim);
  for (Index i = 0; i < p.dim; ++i)
    for (Index j = 0; j < p.dim; ++j) U(i, j) = rng.uniform(-1.0, 1.0);
  const Matrix Y = U * U.transpose();
  const Matrix X = p.forms * Y * p.forms.transpose();
  for (Index i = 0; i < p.num_forms(); ++i)
    for (Index j = i + 1; j < p.num_forms(); ++j)
      EXPECT_NEAR((p.W(i, j).cwiseProduct(Y)).sum(), -2.0 * X(i, j), 1e-9 * std::max(1.0, std::abs(X(i, j))));
}

TEST(ShorAssembly, StrictInteriorPointGivesNegativeProducts) {
  const QpInstance inst = generate_one(Family::pcqmax, 8, 5, "int");
  const auto [kkt, red] = kkt_with_minimal_program(inst);
  const double rho = compute_rho_star(red.F, red.w);
  ASSERT_GT(rho, 0.0);
  const Vector y = Vector::Constant(red.r(), rho / 2.0);
  const ShorProblem p = assemble_shor(red);
  const Matrix Y = rank_one(y);
  for (Index i = 0; i < p.num_forms(); ++i)
    for (Index j = i + 1; j < p.num_forms(); ++j) EXPECT_LT((p.W(i, j).cwiseProduct(Y)).sum(), 0.0);
}

TEST(SolveDnn, IntervalOptimum) {
  for (double tol : {1e-6, 1e-8}) {
    const SdpSolution s = solve_dnn(interval_shor(), tol, 50000);
    EXPECT_TRUE(s.converged);
    EXPECT_LE(s.eps, 10 * tol);
    EXPECT_NEAR(s.objective, 1.0, 10 * tol);
  }
}

TEST(SolveDnn, ZeroObjective) {
  const ShorProblem p = assemble_shor(Matrix::Zero(1, 1), Vector::Zero(1), 0.0, Matrix::Ones(1, 1), Vector::Ones(1));
  const SdpSolution s = solve_dnn(p, 1e-8, 10000);
  EXPECT_NEAR(s.objective, 0.0, 1e-7);
  EXPECT_NEAR(s.nu, 0.0, 1e-7);
}

TEST(SolveDnn, TighterToleranceShrinksGap) {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const QpInstance inst = generate_one(seed % 2 ? Family::pcqmax : Family::cqmax, 6, 900 + seed, "gap");
    const auto [kkt, red] = kkt_with_minimal_program(inst);
    const ShorProblem p = assemble_shor(red);
    const SdpSolution coarse = solve_dnn(p, 1e-5, 50000);
    const SdpSolution fine = solve_dnn(p, 1e-6, 50000);
    const double scale = std::max(1.0, p.Qhat.cwiseAbs().maxCoeff());
    EXPECT_LE(fine.gap, 1e-6 * scale + 1e-12);
    EXPECT_LE(coarse.gap, 1e-5 * scale + 1e-12);
    if (fine.gap <= coarse.gap) ++improved;
  }
  EXPECT_GE(improved, 18);
}

TEST(Certificate, ExactDualWhenEpsZero) {
  SdpSolution s;
  s.nu = 3.0;
  s.eps = 0.0;
  EXPECT_EQ(certify_upper_bound(s, 5.0).upper, 3.0);
}

TEST(Certificate, FormulaValue) {
  SdpSolution s;
  s.nu = 1.0;
  s.eps = 1e-8;
  EXPECT_DOUBLE_EQ(certify_upper_bound(s, 1.0).upper, 1.0 + 2e-8);
}

TEST(Certificate, UnboundedRegionGivesInfinity) {
  SdpSolution s;
  EXPECT_TRUE(std::isinf(certify_upper_bound(s, std::numeric_limits<double>::infinity()).upper));
}

TEST(DnnBound, IntervalBaseRegion) {
  SdpSettings st;
  st.tol = 1e-8;
  st.max_iter = 50000;
  const ValidBound b = dnn_bound_region(test::interval(1.0, 0.0, 0.0), nullptr, nullptr, st);
  EXPECT_GE(b.upper, 1.0);
  EXPECT_LE(b.upper, 1.0 + 3e-8);
}

TEST(DnnBound, EmptyRegionIsMinusInfinity) {
  const Vector tau = Vector::Constant(1, 0.5);
  const ValidBound b = dnn_bound_region(test::interval(1.0, 0.0, 0.0), &tau, nullptr, SdpSettings{});
  EXPECT_TRUE(std::isinf(b.upper) && b.upper < 0);
}

TEST(DnnBound, ObserverSeesEverySolve) {
  int calls = 0;
  SdpObserver obs = [&](const SdpEvent& e) {
    ++calls;
    EXPECT_EQ(e.F.cols(), 2);
  };
  const Vector theta = Vector::Constant(1, 4.0);
  dnn_bound_region(test::interval(1.0, 0.0, 0.0), nullptr, &theta, SdpSettings{}, &obs);
  EXPECT_EQ(calls, 1);
}

TEST(DnnBound, DominatesOracleOnRandomRegions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const QpInstance inst = generate_one(seed % 2 ? Family::pcqmax : Family::cqmax, 9, 500 + seed, "bound");
    const auto [kkt, red] = kkt_with_minimal_program(inst);
    const ValidBound b = dnn_bound_region(red, nullptr, nullptr, SdpSettings{});
    const double phi = oracle_optimum(inst).value;
    EXPECT_GE(b.upper, phi - 1e-9 * std::max(1.0, std::abs(phi)));
  }
}

TEST(Lemma1, IntervalOptimum) {
  const Matrix X = lemma1_lift(Matrix::Ones(1, 1), Vector::Ones(1), Matrix::Ones(1, 1), Vector::Ones(1));
  Matrix expected(3, 3);
  expected << 1, 0, 1, 0, 0, 0, 1, 0, 1;
  EXPECT_LE((X - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NO_THROW(check_lemma1_lift(X, Matrix::Ones(1, 1), Vector::Ones(1)));
  EXPECT_DOUBLE_EQ(lemma1_objective(X, Matrix::Ones(1, 1), Vector::Zero(1), 0.0), 1.0);
}

TEST(Lemma1, RankOneLift) {
  const QpInstance inst = generate_one(Family::cqmax, 7, 8, "rank1");
  const auto [kkt, red] = kkt_with_minimal_program(inst);
  const double rho = compute_rho_star(red.F, red.w);
  const Vector y = Vector::Constant(red.r(), rho);
  const Matrix X = lemma1_lift(y * y.transpose(), y, red.F, red.w);
  Vector z(red.r() + red.F.cols() + 1);
  z << y, red.w - red.F.transpose() * y, 1.0;
  EXPECT_LE((X - z * z.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NO_THROW(check_lemma1_lift(X, red.F, red.w));
  EXPECT_NEAR(lemma1_objective(X, red.Q, red.d, red.v), evaluate_reduced(red, y), 1e-9 * std::max(1.0, std::abs(red.v)));
}

TEST(Lemma1, ObjectiveIdentityOnRandomPairs) {
  SplitMix64 rng(12);
  for (int k = 0; k < 10; ++k) {
    const Index r = 3, m = 2;
    Matrix Q(r, r), F(r, m), U(r, r);
    Vector d(r), w(m), y(r);
    for (Index i = 0; i < r; ++i) {
      d(i) = rng.uniform(-1, 1);
      y(i) = rng.uniform();
      for (Index j = 0; j < r; ++j) {
        Q(i, j) = rng.uniform(-1, 1);
        U(i, j) = rng.uniform(-1, 1);
      }
      for (Index j = 0; j < m; ++j) F(i, j) = rng.uniform(-1, 1);
    }
    Q = symmetrize(Q);
    for (Index j = 0; j < m; ++j) w(j) = rng.uniform(1, 2);
    const Matrix Y = U * U.transpose();
    const double v = rng.uniform(-1, 1);
    const double expected = (Q.cwiseProduct(Y)).sum() + 2.0 * d.dot(y) + v;
    EXPECT_NEAR(lemma1_objective(lemma1_lift(Y, y, F, w), Q, d, v), expected, 1e-12);
  }
}

TEST(Lemma1, ViolationNamesConstraint) {
  Matrix X = lemma1_lift(Matrix::Ones(1, 1), Vector::Ones(1), Matrix::Ones(1, 1), Vector::Ones(1));
  X(0, 2) = X(2, 0) = 0.5;
  try {
    check_lemma1_lift(X, Matrix::Ones(1, 1), Vector::Ones(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FeasibilityViolation);
  }
}

TEST(SdpDump, ContainsFields) {
  const SdpSolution s = solve_dnn(interval_shor(), 1e-6, 10000);
  const std::string json = sdp_solution_json(s);
  for (const char* key : {"\"Yhat\"", "\"lambda\"", "\"nu\"", "\"eps\""}) EXPECT_NE(json.find(key), std::string::npos);
}
