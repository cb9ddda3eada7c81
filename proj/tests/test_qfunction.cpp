#include <gtest/gtest.h>

#include <random>

#include "commands.hpp"
#include "datapolicy/qfunction.hpp"
#include "datapolicy/study.hpp"
#include "oracles.hpp"

using namespace datapolicy;
using namespace datapolicy::testing;

namespace {

SafeSetStore line_store(const std::vector<double>& xs, const std::vector<double>& j) {
  std::vector<Vector> u(xs.size(), Vector::Zero(1));
  Trajectory t = raw_trajectory(scalars({}), {}, j);
  for (double x : xs) t.states.push_back(Vector::Constant(1, x));
  t.inputs = u;
  return build_safe_set_unvalidated({t}, scalar_integrator(), StageCost(QuadStageCost::identity(1, 1)), OriginMode{});
}

const SafeSetStore& q1_store() {
  static const SafeSetStore s = *cli::run_table2(seed_store(), std::nullopt, PolicyConfig{}, {}, 1).store1;
  return s;
}

}  // namespace

TEST(QGlobal, OriginHasZeroValue) {
  const QueryResult q = eval_q_global(seed_store(), vec({0, 0}));
  ASSERT_TRUE(q.feasible);
  EXPECT_NEAR(q.value, 0.0, 1e-12);
}

TEST(QGlobal, BenchmarkValues) {
  for (const ClqrConfig& config : {ClqrConfig{}, study_clqr_config()}) {
    const SafeSetStore s = seed_store(study_seed_state(), kStudyInputWeight, config);
    EXPECT_NEAR(eval_q_global(s, study_seed_state()).value, 112.53, 0.01 * 112.53);
    EXPECT_NEAR(eval_q_global(s, study_second_seed_state()).value, 89.60, 0.01 * 89.60);
  }
}

TEST(QGlobal, OutsideHullIsInfeasible) {
  const QueryResult q = eval_q_global(seed_store(), vec({100, 100}));
  EXPECT_FALSE(q.feasible);
}

TEST(QGlobal, QueryResultInvariants) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 50, 3)) {
    const QueryResult q = eval_q_global(s, x);
    ASSERT_TRUE(q.feasible);
    EXPECT_GE(q.multipliers.minCoeff(), -kDefaultFeasTol);
    EXPECT_NEAR(q.multipliers.sum(), 1.0, kDefaultFeasTol);
    EXPECT_LE((q.combine(s.point_matrix()) - x).lpNorm<Eigen::Infinity>(), kDefaultFeasTol);
    double v = 0.0;
    for (std::size_t c = 0; c < q.columns.size(); ++c) v += q.multipliers(static_cast<Index>(c)) * s.cost_vector()(q.columns[c]);
    EXPECT_NEAR(v, q.value, kDefaultFeasTol * (1 + std::abs(v)));
    for (const PointIndex& p : q.support) {
      EXPECT_GT(q.multipliers(static_cast<Index>(
                    std::find(q.columns.begin(), q.columns.end(), static_cast<Index>(s.column_of(p.trajectory, p.time))) -
                    q.columns.begin())),
                kDefaultFeasTol);
    }
  }
}

TEST(QGlobal, DimensionMismatch) { EXPECT_THROW(eval_q_global(seed_store(), vec({1, 2, 3})), DimensionError); }

TEST(Knn, ExactPointWithOneNeighbor) {
  const SafeSetStore s = seed_store();
  const Vector x = s.trajectories()[0].states[5];
  const LocalSelection sel = knn_select(s, x, 1);
  ASSERT_EQ(sel.indices.size(), 1u);
  EXPECT_EQ(sel.indices[0], (std::vector<std::size_t>{5}));
}

TEST(Knn, LargeNSelectsWholeTrajectory) {
  const SafeSetStore s = seed_store();
  const LocalSelection sel = knn_select(s, vec({1, 1}), 1000);
  EXPECT_EQ(sel.indices[0].size(), s.trajectories()[0].size());
}

TEST(Knn, HandDistances) {
  const SafeSetStore s = line_store({0, 1, 2, 3}, {3, 2, 1, 0});
  const LocalSelection sel = knn_select(s, Vector::Constant(1, 1.6), 2);
  EXPECT_EQ(sel.indices[0], (std::vector<std::size_t>{1, 2}));
}

TEST(Knn, TiesGoToLowerTimeIndex) {
  const SafeSetStore s = line_store({0, 2, 4}, {2, 1, 0});
  const LocalSelection sel = knn_select(s, Vector::Constant(1, 1.0), 1);
  EXPECT_EQ(sel.indices[0], (std::vector<std::size_t>{0}));
}

TEST(Knn, SelectionInvariants) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 30, 5)) {
    for (std::size_t n : {1u, 4u, 10u, 50u}) {
      const LocalSelection sel = knn_select(s, x, n);
      EXPECT_EQ(sel.indices, knn_select(s, x, n).indices);
      for (std::size_t j = 0; j < sel.indices.size(); ++j) {
        const auto& idx = sel.indices[j];
        EXPECT_EQ(idx.size(), std::min(n, s.trajectories()[j].size()));
        EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
        EXPECT_TRUE(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        // Every unselected index is at least as far as every selected one.
        double worst = 0.0;
        for (std::size_t k : idx) worst = std::max(worst, (s.trajectories()[j].states[k] - x).norm());
        for (std::size_t k = 0; k < s.trajectories()[j].size(); ++k) {
          if (std::find(idx.begin(), idx.end(), k) == idx.end()) {
            EXPECT_GE((s.trajectories()[j].states[k] - x).norm(), worst);
          }
        }
      }
    }
  }
}

TEST(QLocal, StoredPointBoundedByItsCost) {
  const SafeSetStore s = seed_store();
  for (std::size_t k = 0; k < s.trajectories()[0].size(); ++k) {
    for (std::size_t n : {1u, 3u, 10u}) {
      const QueryResult q = eval_q_local(s, s.trajectories()[0].states[k], n);
      ASSERT_TRUE(q.feasible);
      EXPECT_LE(q.value, s.trajectories()[0].costs_to_go[k] + 1e-9);
    }
  }
}

TEST(QLocal, AllPointsEqualsGlobal) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 30, 9)) {
    const QueryResult l = eval_q_local(s, x, s.longest_trajectory());
    const QueryResult g = eval_q_global(s, x);
    ASSERT_TRUE(l.feasible && g.feasible);
    EXPECT_NEAR(l.value, g.value, 1e-8);
  }
}

TEST(QLocal, LineInterpolation) {
  const SafeSetStore s = line_store({0, 1, 2}, {4, 2, 0});
  const QueryResult l = eval_q_local(s, Vector::Constant(1, 0.5), 2);
  ASSERT_TRUE(l.feasible);
  EXPECT_NEAR(l.value, 3.0, 1e-12);
  EXPECT_NEAR(eval_q_global(s, Vector::Constant(1, 0.5)).value, 3.0, 1e-12);
}

TEST(QLocal, LocallyInfeasibleInsideHull) {
  const SafeSetStore s = line_store({0, 1, 2, 3}, {3, 2, 1, 0});
  // Nearest single point to 1.4 is 1; the hull of {1} does not contain 1.4.
  EXPECT_FALSE(eval_q_local(s, Vector::Constant(1, 1.4), 1).feasible);
  EXPECT_TRUE(contains(s, Vector::Constant(1, 1.4)));
}

TEST(Contains, Examples) {
  const SafeSetStore s = seed_store();
  const auto& t = s.trajectories()[0];
  for (const auto& x : t.states) EXPECT_TRUE(contains(s, x));
  EXPECT_TRUE(contains(s, 0.3 * t.states[2] + 0.7 * t.states[6]));
  EXPECT_FALSE(contains(s, vec({100, 100})));
}

TEST(QProperty, Convexity) {
  const SafeSetStore& s = q1_store();
  const auto xs = cli::sample_in_safe_set(s, 60, 21);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
    const double th = unit(rng);
    const double qx = eval_q_global(s, xs[i]).value;
    const double qy = eval_q_global(s, xs[i + 1]).value;
    const QueryResult mid = eval_q_global(s, th * xs[i] + (1 - th) * xs[i + 1]);
    ASSERT_TRUE(mid.feasible);
    EXPECT_LE(mid.value, th * qx + (1 - th) * qy + 1e-7);
  }
}

TEST(QProperty, AnchorBound) {
  const SafeSetStore& s = q1_store();
  for (Index c = 0; c < s.column_count(); ++c) {
    EXPECT_LE(eval_q_global(s, s.point_matrix().col(c)).value, s.cost_vector()(c) + 1e-9);
  }
}

TEST(QProperty, RestrictionBound) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 100, 33)) {
    const QueryResult g = eval_q_global(s, x);
    for (std::size_t n : {2u, 5u, 10u}) {
      const QueryResult l = eval_q_local(s, x, n);
      if (l.feasible && g.feasible) {
        EXPECT_GE(l.value, g.value - 1e-8);
      }
    }
  }
}

TEST(QProperty, SupportSizeAtMostStateDimPlusOne) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 100, 41)) {
    const QueryResult q = eval_q_global(s, x);
    EXPECT_LE(q.support.size(), static_cast<std::size_t>(s.state_dim() + 1));
    Index nonzero = 0;
    for (Index i = 0; i < q.multipliers.size(); ++i) nonzero += q.multipliers(i) != 0.0 ? 1 : 0;
    EXPECT_LE(nonzero, s.state_dim() + 1);
  }
}

TEST(QProperty, Deterministic) {
  const SafeSetStore& s = q1_store();
  for (const Vector& x : cli::sample_in_safe_set(s, 20, 43)) {
    const QueryResult a = eval_q_global(s, x);
    const QueryResult b = eval_q_global(s, x);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.columns, b.columns);
    EXPECT_EQ(a.multipliers, b.multipliers);
  }
}
