#include <gtest/gtest.h>

#include "qpcd/generate.hpp"
#include "qpcd/instance_io.hpp"
#include "qpcd/model.hpp"
#include "qpcd/oracle.hpp"
#include "test_support.hpp"

using namespace qpcd;

TEST(Reduce, ToyAtSecondVertex) {
  const QpInstance inst = test::toy();
  const ReducedProgram red = reduce_at_vertex(inst, Vector::Unit(2, 1), {1});
  ASSERT_EQ(red.r(), 1);
  EXPECT_DOUBLE_EQ(red.F(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(red.w(0), 1.0);
  EXPECT_DOUBLE_EQ(red.Q(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(red.d(0), 0.0);
  EXPECT_DOUBLE_EQ(red.v, 0.0);
}

TEST(Reduce, ToyAtFirstVertex) {
  const QpInstance inst = test::toy();
  const ReducedProgram red = reduce_at_vertex(inst, Vector::Unit(2, 0), {0});
  EXPECT_DOUBLE_EQ(red.F(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(red.w(0), 1.0);
  EXPECT_DOUBLE_EQ(red.Q(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(red.d(0), -1.0);
  EXPECT_DOUBLE_EQ(red.v, 1.0);
}

TEST(Reduce, ZeroObjective) {
  QpInstance inst = test::toy();
  inst.H.setZero();
  const ReducedProgram red = reduce_at_vertex(inst, Vector::Unit(2, 0), {0});
  EXPECT_EQ(red.Q(0, 0), 0.0);
  EXPECT_EQ(red.d(0), 0.0);
  EXPECT_EQ(red.v, 0.0);
}

TEST(Reduce, MatchesSubstitutionOnRandomInstances) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const QpInstance inst = generate_one(s % 2 ? Family::pcqmax : Family::cqmax, 8, s, "r");
    const std::vector<Vector> verts = enumerate_vertices(inst);
    ASSERT_FALSE(verts.empty());
    const Vector& x0 = verts.front();
    std::vector<Index> basis;
    for (Index j = 0; j < inst.n() && static_cast<Index>(basis.size()) < inst.m(); ++j)
      if (x0(j) > 1e-9) basis.push_back(j);
    for (Index j = 0; j < inst.n() && static_cast<Index>(basis.size()) < inst.m(); ++j) {
      if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
      std::vector<Index> trial = basis;
      trial.push_back(j);
      if (numerical_rank(select_columns(inst.A, trial)) == static_cast<Index>(trial.size())) basis = trial;
    }
    std::sort(basis.begin(), basis.end());
    const ReducedProgram red = reduce_at_vertex(inst, x0, basis);
    EXPECT_NEAR(red.v, evaluate_phi(inst, x0), 1e-8 * std::max(1.0, std::abs(red.v)));
    SplitMix64 rng(s + 100);
    for (int k = 0; k < 5; ++k) {
      Vector y(red.r());
      for (Index i = 0; i < y.size(); ++i) y(i) = rng.uniform(0.0, 0.01);
      const Vector x = assemble_x(red, y);
      EXPECT_LE((inst.A * x - inst.b).cwiseAbs().maxCoeff(), 1e-9);
      const double phi = evaluate_phi(inst, x);
      EXPECT_NEAR(evaluate_reduced(red, y), phi, 1e-9 * std::max(1.0, std::abs(phi)));
    }
  }
}

TEST(Reduce, InfeasibleVertexRejected) {
  try {
    reduce_at_vertex(test::toy(), Vector::Constant(2, 1.0), {0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleVertex);
  }
}

TEST(Reduce, SingularBasisRejected) {
  QpInstance inst = test::toy();
  inst.A.resize(2, 2);
  inst.A << 1, 1, 2, 2;
  inst.b = Vector::Constant(2, 1.0);
  EXPECT_THROW(reduce_at_basis(inst, {0, 1}), Error);
}

TEST(Evaluate, Phi) {
  const QpInstance inst = test::toy();
  EXPECT_EQ(evaluate_phi(inst, Vector::Zero(2)), 0.0);
  EXPECT_EQ(evaluate_phi(inst, Vector::Unit(2, 0)), 1.0);
}

TEST(Evaluate, PsiIdentities) {
  const QpInstance inst = generate_one(Family::cqmax, 6, 3, "psi");
  SplitMix64 rng(9);
  for (int k = 0; k < 20; ++k) {
    Vector x(6), xt(6);
    for (Index i = 0; i < 6; ++i) {
      x(i) = rng.uniform();
      xt(i) = rng.uniform();
    }
    const double scale = std::max(1.0, std::abs(evaluate_phi(inst, x)));
    EXPECT_NEAR(evaluate_psi(inst, x, x), evaluate_phi(inst, x), 1e-12 * scale);
    EXPECT_LE(evaluate_psi(inst, x, xt), 0.5 * (evaluate_phi(inst, x) + evaluate_phi(inst, xt)) + 1e-9 * scale);
    EXPECT_NEAR(evaluate_psi(inst, Vector::Zero(6), xt), inst.p.dot(xt), 1e-12 * scale);
  }
}

TEST(LiftCut, ToyMechanics) {
  const QpInstance lifted = lift_cut(test::toy(), CutPlane{Vector::Constant(1, 2.0), {1}, CutKind::konno});
  ASSERT_EQ(lifted.n(), 3);
  ASSERT_EQ(lifted.m(), 2);
  EXPECT_EQ(lifted.A(1, 0), 0.0);
  EXPECT_EQ(lifted.A(1, 1), 2.0);
  EXPECT_EQ(lifted.A(1, 2), -1.0);
  EXPECT_EQ(lifted.b(1), 1.0);
  EXPECT_EQ(lifted.H(2, 2), 0.0);
  EXPECT_EQ(lifted.p(2), 0.0);
}

TEST(LiftCut, ZeroThetaRejected) {
  EXPECT_THROW(lift_cut(test::toy(), CutPlane{Vector::Zero(1), {1}, CutKind::konno}), Error);
}

TEST(LiftCut, MaximumMatchesHalfspaceRestriction) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const QpInstance inst = generate_one(Family::cqmax, 7, 40 + s, "lift");
    const std::vector<Vector> verts = enumerate_vertices(inst);
    std::vector<Index> nonbasic;
    for (Index j = 0; j < inst.n() - inst.m(); ++j) nonbasic.push_back(j);
    Vector theta(static_cast<Index>(nonbasic.size()));
    for (Index k = 0; k < theta.size(); ++k) theta(k) = 0.5 + 0.25 * static_cast<double>(k);
    const QpInstance lifted = lift_cut(inst, CutPlane{theta, nonbasic, CutKind::konno});
    double direct = -std::numeric_limits<double>::infinity();
    Matrix G = Matrix::Zero(1, inst.n());
    for (size_t k = 0; k < nonbasic.size(); ++k) G(0, nonbasic[k]) = theta(static_cast<Index>(k));
    // Vertices of {x in F : theta'x_N >= 1} come from vertex enumeration of the lifted polytope.
    double lifted_max = -std::numeric_limits<double>::infinity();
    for (const Vector& x : enumerate_vertices(lifted)) {
      lifted_max = std::max(lifted_max, evaluate_phi(lifted, x));
      EXPECT_GE((G * x.head(inst.n()))(0), 1.0 - 1e-9);
      EXPECT_TRUE(is_feasible(inst, Vector(x.head(inst.n()))));
    }
    for (const Vector& x : verts)
      if ((G * x)(0) >= 1.0) direct = std::max(direct, evaluate_phi(inst, x));
    if (std::isfinite(lifted_max)) EXPECT_GE(lifted_max, direct - 1e-8 * std::max(1.0, std::abs(direct)));
  }
}

TEST(InstanceIo, RoundTripIsExact) {
  QpInstance inst = generate_one(Family::cqmax, 6, 11, "round");
  inst.vR = 1.0 / 3.0;
  const std::string text = format_instance(inst);
  const QpInstance back = parse_instance(text);
  EXPECT_EQ(back.name, "round");
  EXPECT_EQ(back.A, inst.A);
  EXPECT_EQ(back.b, inst.b);
  EXPECT_EQ(back.H, inst.H);
  EXPECT_EQ(back.p, inst.p);
  ASSERT_TRUE(back.vR.has_value());
  EXPECT_EQ(*back.vR, *inst.vR);
  EXPECT_EQ(format_instance(back), text);
}

TEST(InstanceIo, BadLengthIsDimensionMismatch) {
  const std::string text = R"({"n": 2, "m": 1, "A": [[1, 1]], "b": [1, 2], "H": [[1, 0], [0, 0]], "p": [0, 0]})";
  try {
    parse_instance(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
}

TEST(InstanceIo, MissingOptionalReference) {
  const QpInstance inst = parse_instance(R"({"n": 2, "m": 1, "A": [[1, 1]], "b": [1], "H": [[1, 0], [0, 0]], "p": [0, 0]})");
  EXPECT_FALSE(inst.vR.has_value());
}

TEST(InstanceIo, MalformedJsonIsParseError) {
  try {
    parse_instance("{\"n\": 2,");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}
