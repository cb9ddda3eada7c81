#include <gtest/gtest.h>

#include <random>

#include "datapolicy/lp.hpp"
#include "oracles.hpp"

using namespace datapolicy;
using datapolicy::testing::lp_oracle;
using datapolicy::testing::random_lp;
using datapolicy::testing::vec;

namespace {

LpProblem make(Vector c, Matrix e, Vector b) { return LpProblem{std::move(c), std::move(e), std::move(b)}; }

Matrix mat(Index r, Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  Index i = 0;
  for (double x : v) m(i / c, i % c) = x, ++i;
  return m;
}

}  // namespace

TEST(Simplex, ForcedByNonnegativity) {
  const LpSolution s = simplex_solve(make(vec({1, 0}), mat(1, 2, {1, 1}), vec({1})), kDefaultFeasTol);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.multipliers(0), 0.0, 1e-12);
  EXPECT_NEAR(s.multipliers(1), 1.0, 1e-12);
  EXPECT_NEAR(s.objective, 0.0, 1e-12);
}

TEST(Simplex, SquareSystemInterpolation) {
  const LpSolution s = simplex_solve(make(vec({0, 4}), mat(2, 2, {1, 1, 0, 2}), vec({1, 1})), kDefaultFeasTol);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.multipliers(0), 0.5, 1e-12);
  EXPECT_NEAR(s.multipliers(1), 0.5, 1e-12);
  EXPECT_NEAR(s.objective, 2.0, 1e-12);
}

TEST(Simplex, InfeasibleWhenSecondMultiplierMustBeNegative) {
  const LpSolution s = simplex_solve(make(vec({0, 0}), mat(2, 2, {1, 1, 1, -1}), vec({1, 3})), kDefaultFeasTol);
  EXPECT_EQ(s.status, LpStatus::Infeasible);
}

TEST(Simplex, Unbounded) {
  // x1 - x2 = 1, minimize -x1: the ray (1, 1) is unblocked.
  const LpSolution s = simplex_solve(make(vec({-1, 0}), mat(1, 2, {1, -1}), vec({1})), kDefaultFeasTol);
  EXPECT_EQ(s.status, LpStatus::Unbounded);
}

TEST(Simplex, RedundantRowsAreHarmless) {
  const LpSolution s =
      simplex_solve(make(vec({3, 1, 2}), mat(2, 3, {1, 1, 1, 2, 2, 2}), vec({1, 2})), kDefaultFeasTol);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
}

TEST(Simplex, DimensionMismatchIsAnError) {
  EXPECT_THROW(simplex_solve(make(vec({1, 2, 3}), mat(1, 2, {1, 1}), vec({1})), kDefaultFeasTol), DimensionError);
  EXPECT_THROW(simplex_solve(make(vec({1, 2}), mat(1, 2, {1, 1}), vec({1, 2})), kDefaultFeasTol), DimensionError);
  EXPECT_THROW(simplex_solve(make(Vector(0), Matrix(1, 0), vec({1})), kDefaultFeasTol), DimensionError);
}

TEST(Simplex, NonFiniteDataIsAnError) {
  EXPECT_THROW(simplex_solve(make(vec({1, NAN}), mat(1, 2, {1, 1}), vec({1})), kDefaultFeasTol), Error);
}

TEST(Simplex, OverflowIsNumericErrorNotInfeasible) {
  const double big = 1e300;
  const LpProblem p = make(vec({1, 1}), mat(2, 2, {1e-300, big, big, 1e-300}), vec({big, big}));
  try {
    const LpSolution s = simplex_solve(p, kDefaultFeasTol);
    EXPECT_NE(s.status, LpStatus::Infeasible);
  } catch (const NumericError&) {
    SUCCEED();
  }
}

TEST(Simplex, RejectsNonPositiveTolerance) {
  EXPECT_THROW(simplex_solve(make(vec({1}), mat(1, 1, {1}), vec({1})), 0.0), Error);
}

TEST(LpFeasible, HullMembership) {
  const Matrix e1 = mat(2, 2, {1, 1, 0, 2});
  EXPECT_TRUE(lp_feasible(e1, vec({1, 1}), kDefaultFeasTol));
  EXPECT_FALSE(lp_feasible(e1, vec({1, 3}), kDefaultFeasTol));
  const Matrix e2 = mat(3, 3, {1, 1, 1, 0, 1, 0, 0, 0, 1});
  EXPECT_TRUE(lp_feasible(e2, vec({1, 0.25, 0.25}), kDefaultFeasTol));
  EXPECT_THROW(lp_feasible(e2, vec({1, 0.25}), kDefaultFeasTol), DimensionError);
}

TEST(SimplexProperty, MatchesEnumerationOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const LpProblem p = random_lp(rng);
    const auto oracle = lp_oracle(p);
    const LpSolution s = simplex_solve(p, kDefaultFeasTol);
    ASSERT_EQ(s.status, oracle.status) << "trial " << trial;
    if (s.optimal()) {
      EXPECT_NEAR(s.objective, oracle.objective, 1e-8) << "trial " << trial;
    }
  }
}

TEST(SimplexProperty, OptimalSolutionsAreFeasible) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const LpProblem p = random_lp(rng);
    const LpSolution s = simplex_solve(p, kDefaultFeasTol);
    if (!s.optimal()) continue;
    EXPECT_LE((p.eq_matrix * s.multipliers - p.eq_rhs).lpNorm<Eigen::Infinity>(), kDefaultFeasTol);
    EXPECT_GE(s.multipliers.minCoeff(), -kDefaultFeasTol);
    EXPECT_NEAR(s.objective, p.cost.dot(s.multipliers), kDefaultFeasTol * (1 + std::abs(s.objective)));
  }
}

TEST(SimplexProperty, Deterministic) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const LpProblem p = random_lp(rng);
    const LpSolution a = simplex_solve(p, kDefaultFeasTol);
    const LpSolution b = simplex_solve(p, kDefaultFeasTol);
    ASSERT_EQ(a.status, b.status);
    if (!a.optimal()) continue;
    ASSERT_EQ(a.multipliers.size(), b.multipliers.size());
    for (Index i = 0; i < a.multipliers.size(); ++i) EXPECT_EQ(a.multipliers(i), b.multipliers(i));
    EXPECT_EQ(a.basis, b.basis);
  }
}

TEST(SimplexProperty, FeasibleWheneverSomeCostIsOptimal) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const LpProblem p = random_lp(rng);
    if (simplex_solve(p, kDefaultFeasTol).optimal()) {
      EXPECT_TRUE(lp_feasible(p.eq_matrix, p.eq_rhs, kDefaultFeasTol)) << "trial " << trial;
    }
  }
}

TEST(SimplexProperty, DegenerateCyclingExampleTerminates) {
  // Beale's example in equality form with slacks.
  LpProblem p;
  p.eq_matrix = mat(3, 7, {0.25, -8, -1, 9, 1, 0, 0, 0.5, -12, -0.5, 3, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1});
  p.eq_rhs = vec({0, 0, 1});
  p.cost = vec({-0.75, 20, -0.5, 6, 0, 0, 0});
  const LpSolution s = simplex_solve(p, kDefaultFeasTol);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective, -1.25, 1e-9);
}
