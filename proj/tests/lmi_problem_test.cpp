#include "netsyn/lmi/problem.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "netsyn/block_matrix.hpp"
#include "netsyn/errors.hpp"

namespace netsyn::lmi {
namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(LmiSolveTest, ScalarLyapunovStable) {
  // x' = -x: p >= eps and -(a p + p a) = 2p >= eps.
  LmiProblem prob;
  const auto p = prob.symmetric(1, "p");
  prob.strictify(p, 1e-6);
  prob.strictify(2.0 * AffineExpr(p), 1e-6);
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_GT(sol[p](0, 0), 0.0);
}

TEST(LmiSolveTest, ScalarLyapunovUnstableIsInfeasible) {
  LmiProblem prob;
  const auto p = prob.symmetric(1, "p");
  prob.strictify(p, 1e-6);
  prob.strictify(-2.0 * 0.5 * AffineExpr(p), 1e-6);
  EXPECT_EQ(solve(prob).status, SolveStatus::Infeasible);
}

TEST(LmiSolveTest, NormObjectiveReachesUnconstrainedOptimum) {
  LmiProblem prob;
  const auto q = prob.scalar("q");
  prob.add_psd(AffineExpr(q) - scalar(1.0));
  prob.minimize_norm(AffineExpr(q) - scalar(3.0));
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol[q](0, 0), 3.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.0, 1e-6);
}

TEST(LmiSolveTest, NormObjectiveActiveConstraint) {
  // min |q - 3| s.t. q <= 1  ->  q = 1, objective 2.
  LmiProblem prob;
  const auto q = prob.scalar("q");
  prob.add_psd(scalar(1.0) - AffineExpr(q));
  prob.minimize_norm(AffineExpr(q) - scalar(3.0));
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol[q](0, 0), 1.0, 1e-6);
  EXPECT_NEAR(sol.objective, 2.0, 1e-6);
}

TEST(LmiSolveTest, MatrixLyapunovCertificate) {
  MatrixXd a(2, 2);
  a << -1, 2, 0, -3;
  LmiProblem prob;
  const auto p = prob.symmetric(2, "P");
  prob.add_psd(p, 1.0);
  prob.strictify(-(a.transpose() * AffineExpr(p) + AffineExpr(p) * a), 1e-6);
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  const MatrixXd lyap = -(a.transpose() * sol[p] + sol[p] * a);
  EXPECT_EQ(definiteness_oracle(lyap).verdict, Definiteness::PositiveDefinite);
  EXPECT_TRUE(sol[p].isApprox(sol[p].transpose()));
}

TEST(LmiSolveTest, MatrixLyapunovUnstableIsInfeasible) {
  MatrixXd a(2, 2);
  a << 0.1, 1, 0, -1;
  LmiProblem prob;
  const auto p = prob.symmetric(2, "P");
  prob.add_psd(p, 1.0);
  prob.strictify(-(a.transpose() * AffineExpr(p) + AffineExpr(p) * a), 1e-6);
  EXPECT_EQ(solve(prob).status, SolveStatus::Infeasible);
}

TEST(LmiSolveTest, EqualityConstraintsIncludingRedundantRows) {
  LmiProblem prob;
  const auto x = prob.symmetric(2, "X");
  MatrixXd target(2, 2);
  target << 2, 1, 1, 3;
  // Symmetric equality lowers to a rank-deficient row set.
  prob.add_equality(x, target);
  prob.add_psd(x);
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_TRUE(sol[x].isApprox(target, 1e-7));
}

TEST(LmiSolveTest, InconsistentEqualitiesAreInfeasible) {
  LmiProblem prob;
  const auto q = prob.scalar("q");
  prob.add_equality(q, scalar(1.0));
  prob.add_equality(q, scalar(2.0));
  EXPECT_EQ(solve(prob).status, SolveStatus::Infeasible);
}

TEST(LmiSolveTest, LinearObjectiveOnTrace) {
  // min trace(X) s.t. X >= C  ->  X = C.
  MatrixXd c(2, 2);
  c << 2, -1, -1, 1;
  LmiProblem prob;
  const auto x = prob.symmetric(2, "X");
  prob.add_psd(AffineExpr(x) - c);
  AffineExpr tr = MatrixXd::Identity(1, 2) * AffineExpr(x) * MatrixXd::Identity(2, 1) +
                  MatrixXd::Identity(1, 2).rowwise().reverse() * AffineExpr(x) *
                      MatrixXd::Identity(2, 1).colwise().reverse();
  prob.minimize_linear(tr);
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-6);
}

TEST(StrictifyTest, IdentityIsFeasible) {
  LmiProblem prob;
  prob.strictify(AffineExpr::identity(2), 0.5);
  EXPECT_EQ(solve(prob).status, SolveStatus::Optimal);
}

TEST(StrictifyTest, ZeroIsInfeasible) {
  LmiProblem prob;
  prob.strictify(AffineExpr::zero(2, 2), 1e-6);
  EXPECT_EQ(solve(prob).status, SolveStatus::Infeasible);
}

TEST(StrictifyTest, DiagonalThreshold) {
  const double eps = 1e-3;
  for (double delta : {0.0, 5e-4, 1e-3, 2e-3}) {
    LmiProblem prob;
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = delta;
    prob.strictify(AffineExpr(d), eps);
    EXPECT_EQ(solve(prob).status == SolveStatus::Optimal, delta >= eps)
        << "delta = " << delta;
  }
}

TEST(StrictifyTest, NonPositiveMarginIsConfigError) {
  LmiProblem prob;
  EXPECT_THROW(prob.strictify(AffineExpr::identity(1), 0.0), ConfigError);
  EXPECT_THROW(prob.strictify(AffineExpr::identity(1), -1.0), ConfigError);
}

TEST(LmiStructureTest, AsymmetricConstraintIsRejected) {
  LmiProblem prob;
  const auto k = prob.rectangular(2, 2, "K");
  prob.add_psd(k);
  EXPECT_THROW(solve(prob), StructureError);
}

TEST(LmiStructureTest, DuplicateLabelsAndBadShapes) {
  LmiProblem prob;
  prob.symmetric(2, "P");
  EXPECT_THROW(prob.symmetric(2, "P"), StructureError);
  EXPECT_THROW(prob.add_psd(AffineExpr::zero(2, 3)), StructureError);
  EXPECT_THROW(AffineExpr::zero(2, 2) + AffineExpr::zero(2, 3), StructureError);
}

TEST(LmiStructureTest, BlockAssemblyChecksShapes) {
  LmiProblem prob;
  const auto p = prob.symmetric(2, "P");
  EXPECT_THROW(AffineExpr::blocks({{p, AffineExpr::zero(1, 1)}}), StructureError);
  const auto e = AffineExpr::blocks(
      {{p, AffineExpr::zero(2, 1)}, {AffineExpr::zero(1, 2), AffineExpr::identity(1)}});
  EXPECT_EQ(e.rows(), 3);
  Values v{{(MatrixXd(2, 2) << 1, 2, 2, 5).finished()}};
  MatrixXd expect = MatrixXd::Zero(3, 3);
  expect.topLeftCorner(2, 2) = v.data[0];
  expect(2, 2) = 1.0;
  EXPECT_TRUE(realize(e, v).isApprox(expect));
}

TEST(LmiPropertyTest, RealizeIsAffine) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto randm = [&](Index r, Index c) {
    MatrixXd m(r, c);
    for (Index k = 0; k < m.size(); ++k) m(k) = g(rng);
    return m;
  };
  LmiProblem prob;
  const auto p = prob.symmetric(3, "P");
  const auto k = prob.rectangular(2, 3, "K");
  const MatrixXd a = randm(3, 3), b = randm(3, 2);
  const AffineExpr e = a.transpose() * AffineExpr(p) + AffineExpr(p) * a +
                       b * AffineExpr(k) + AffineExpr(k).transpose() * b.transpose() +
                       randm(3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd p1 = randm(3, 3), p2 = randm(3, 3);
    p1 = (p1 + p1.transpose()).eval();
    p2 = (p2 + p2.transpose()).eval();
    const Values v1{{p1, randm(2, 3)}}, v2{{p2, randm(2, 3)}};
    const double alpha = std::uniform_real_distribution<double>(-2, 2)(rng);
    Values mix{{alpha * v1.data[0] + (1 - alpha) * v2.data[0],
                alpha * v1.data[1] + (1 - alpha) * v2.data[1]}};
    const MatrixXd lhs = realize(e, mix);
    const MatrixXd rhs = alpha * realize(e, v1) + (1 - alpha) * realize(e, v2);
    EXPECT_LT((lhs - rhs).norm(), 1e-10 * (1 + rhs.norm()));
  }
}

TEST(LmiPropertyTest, OptimalSolutionsPassTheOracle) {
  // Random stable systems: reported Optimal must survive re-checking.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd a(3, 3);
    for (Index k = 0; k < 9; ++k) a(k) = g(rng);
    const double shift =
        a.eigenvalues().real().maxCoeff() + 0.5;
    a -= shift * MatrixXd::Identity(3, 3);
    LmiProblem prob;
    const auto p = prob.symmetric(3, "P");
    prob.add_psd(p, 1.0);
    prob.strictify(-(a.transpose() * AffineExpr(p) + AffineExpr(p) * a), 1e-6);
    const auto sol = solve(prob);
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    for (double s : sol.constraint_slack) EXPECT_GE(s, -1e-7);
  }
}

TEST(LmiOptionsTest, EnvironmentOverridesTolerance) {
  setenv("NETSYN_SOLVER_TOL", "1e-6", 1);
  EXPECT_DOUBLE_EQ(default_solve_options().tolerance, 1e-6);
  setenv("NETSYN_SOLVER_TOL", "garbage", 1);
  EXPECT_DOUBLE_EQ(default_solve_options().tolerance, 1e-8);
  unsetenv("NETSYN_SOLVER_TOL");
}

}  // namespace
}  // namespace netsyn::lmi
