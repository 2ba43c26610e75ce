#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hyfi/socp.hpp"

using namespace hyfi;

namespace {

LinearExpr var(int i, double c = 1.0) {
  LinearExpr e;
  e.add(i, c);
  return e;
}

}  // namespace

TEST(Socp, SingleUpperBound) {
  ConvexProgram p(1);
  p.objective(0) = 1.0;
  p.add_less_equal(var(0), 1.0);
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-8);
  EXPECT_NEAR(r.objective, 1.0, 1e-8);
}

TEST(Socp, UnitBallWithEquality) {
  ConvexProgram p(2);
  p.objective(0) = 1.0;
  p.add_cone({{var(0), var(1)}, LinearExpr(1.0)});
  p.equalities.push_back(var(1));
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-8);
  EXPECT_NEAR(r.x(1), 0.0, 1e-8);
}

TEST(Socp, ContradictoryBoundsAreInfeasible) {
  ConvexProgram p(1);
  p.objective(0) = 1.0;
  p.add_less_equal(var(0), -1.0);
  p.add_less_equal(var(0, -1.0), -1.0);
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Socp, UnboundedRay) {
  ConvexProgram p(2);
  p.objective(0) = 1.0;
  p.add_less_equal(var(1), 1.0);
  p.add_greater_equal(var(0), 0.0);
  EXPECT_EQ(solve(p).status, SolveStatus::Unbounded);
}

TEST(Socp, VariableBounds) {
  ConvexProgram p(2);
  p.objective << 1.0, -1.0;
  p.lower = Eigen::VectorXd::Constant(2, -2.0);
  p.upper = Eigen::VectorXd::Constant(2, 3.0);
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(0), 3.0, 1e-7);
  EXPECT_NEAR(r.x(1), -2.0, 1e-7);
}

TEST(Socp, RotatedConeEpigraph) {
  // min t s.t. t >= x^2, x = 3 via ||(2x, t-1)|| <= t+1.
  ConvexProgram p(2);
  p.objective(1) = -1.0;
  LinearExpr tm1 = var(1);
  tm1 += -1.0;
  LinearExpr tp1 = var(1);
  tp1 += 1.0;
  p.add_cone({{var(0, 2.0), tm1}, tp1});
  LinearExpr eq = var(0);
  eq += -3.0;
  p.equalities.push_back(eq);
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(1), 9.0, 1e-7);
}

// max c.x s.t. ||x - x0|| <= rho has optimum c.x0 + rho ||c||.
TEST(Socp, RandomNormBallsMatchClosedForm) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.1, 5.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 12;
    Eigen::VectorXd c(n), x0(n);
    for (int i = 0; i < n; ++i) {
      c(i) = nd(rng);
      x0(i) = 3.0 * nd(rng);
    }
    const double rho = ud(rng);
    ConvexProgram p(n);
    p.objective = c;
    ConeConstraint cone;
    cone.bound = LinearExpr(rho);
    for (int i = 0; i < n; ++i) {
      LinearExpr a = var(i);
      a += -x0(i);
      cone.args.push_back(a);
    }
    p.add_cone(cone);
    const auto r = solve(p);
    ASSERT_EQ(r.status, SolveStatus::Optimal) << "trial " << trial;
    const double expected = c.dot(x0) + rho * c.norm();
    EXPECT_NEAR(r.objective, expected, 1e-6 * std::max(1.0, std::abs(expected)));
    EXPECT_NEAR(r.objective, c.dot(r.x), 1e-10 * std::max(1.0, std::abs(expected)));
    EXPECT_LE(max_violation(p, r.x), 1e-8);
  }
}

// Weighted norm objective with mixed linear cuts, checked against a KKT-free
// bound: the optimum of max c.x on ||x|| <= 1, x_i <= u_i is found by
// clipping (the active set is computable by water-filling in 1-D directions).
TEST(Socp, BallWithBoxClipMatchesWaterFilling) {
  // max x0 + x1 s.t. ||x|| <= 1, x0 <= 0.2 -> x0 = 0.2, x1 = sqrt(0.96).
  ConvexProgram p(2);
  p.objective << 1.0, 1.0;
  p.add_cone({{var(0), var(1)}, LinearExpr(1.0)});
  p.add_less_equal(var(0), 0.2);
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(0), 0.2, 1e-7);
  EXPECT_NEAR(r.x(1), std::sqrt(0.96), 1e-7);
}

TEST(Socp, DeterministicForFixedInput) {
  ConvexProgram p(3);
  p.objective << 1.0, 2.0, -0.5;
  p.add_cone({{var(0), var(1), var(2)}, LinearExpr(2.0)});
  p.add_less_equal(var(1), 1.0);
  const auto a = solve(p);
  const auto b = solve(p);
  ASSERT_EQ(a.x.size(), b.x.size());
  for (int i = 0; i < a.x.size(); ++i) EXPECT_EQ(a.x(i), b.x(i));
}

TEST(Socp, RejectsMalformedPrograms) {
  ConvexProgram empty(2);
  EXPECT_THROW(solve(empty), Error);
  ConvexProgram bad(1);
  bad.add_less_equal(var(3), 1.0);
  EXPECT_THROW(solve(bad), Error);
}

TEST(Socp, ProgramDumpListsEveryConstraint) {
  ConvexProgram p(2);
  p.objective(0) = 1.0;
  p.add_less_equal(var(0), 1.0);
  p.add_cone({{var(0), var(1)}, LinearExpr(1.0)});
  std::ostringstream os;
  write_program(os, p);
  const std::string s = os.str();
  EXPECT_NE(s.find("socp 2"), std::string::npos);
  EXPECT_NE(s.find("le -1 0:1"), std::string::npos);
  EXPECT_NE(s.find("soc 2"), std::string::npos);
}
