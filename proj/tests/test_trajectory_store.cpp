#include <gtest/gtest.h>

#include <set>

#include "commands.hpp"
#include "datapolicy/safe_set.hpp"
#include "datapolicy/study.hpp"
#include "datapolicy/terminal_demo.hpp"
#include "oracles.hpp"

using namespace datapolicy;
using namespace datapolicy::testing;

TEST(CostToGo, ZeroStatesZeroInputs) {
  const auto ctg = compute_cost_to_go({vec({0, 0}), vec({0, 0})}, {vec({0}), vec({0})},
                                      StageCost(QuadStageCost::identity(2, 1)));
  EXPECT_EQ(ctg, (std::vector<double>{0.0, 0.0}));
}

TEST(CostToGo, HandBackwardSum) {
  const auto ctg = compute_cost_to_go(scalars({2, 1, 0}), scalars({-1, -1, 0}), StageCost(QuadStageCost::identity(1, 1)));
  EXPECT_EQ(ctg, (std::vector<double>{7.0, 2.0, 0.0}));
}

TEST(CostToGo, SeedTrajectory) {
  const SafeSetStore s = seed_store();
  EXPECT_NEAR(s.trajectories()[0].costs_to_go[0], 112.53, 0.01 * 112.53);
}

TEST(CostToGo, DimensionMismatch) {
  EXPECT_THROW(compute_cost_to_go(scalars({2, 1}), scalars({-1}), StageCost(QuadStageCost::identity(1, 1))),
               DimensionError);
}

TEST(BuildSafeSet, ColumnCountOfSingleTrajectory) {
  std::vector<Vector> states, inputs;
  for (int k = 0; k <= 30; ++k) {
    states.push_back(Vector::Constant(1, 3.0 - 0.1 * k));
    inputs.push_back(Vector::Constant(1, k < 30 ? -0.1 : 0.0));
  }
  states.back()(0) = 0.0;
  const StageCost cost(QuadStageCost::identity(1, 1));
  const SafeSetStore s =
      build_safe_set({make_trajectory(states, inputs, cost)}, scalar_integrator(), cost, OriginMode{});
  EXPECT_EQ(s.column_count(), 31);
}

TEST(BuildSafeSet, ElevenTrajectoriesIndexMapBijection) {
  PolicyConfig config;
  const cli::Table2 t = cli::run_table2(seed_store(), std::nullopt, config, {}, 1);
  ASSERT_TRUE(t.store1.has_value());
  const SafeSetStore& s = *t.store1;
  ASSERT_EQ(s.trajectories().size(), 11u);
  std::size_t total = 0;
  for (const auto& tr : s.trajectories()) total += tr.duration() + 1;
  EXPECT_EQ(static_cast<std::size_t>(s.column_count()), total);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (Index c = 0; c < s.column_count(); ++c) {
    const PointIndex at = s.index_map()[static_cast<std::size_t>(c)];
    EXPECT_EQ(s.column_of(at.trajectory, at.time), static_cast<std::size_t>(c));
    EXPECT_EQ(s.point_matrix().col(c), s.trajectories()[at.trajectory].states[at.time]);
    EXPECT_EQ(s.cost_vector()(c), s.trajectories()[at.trajectory].costs_to_go[at.time]);
    seen.insert({at.trajectory, at.time});
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(BuildSafeSet, DuplicateStatesAreKept) {
  const SafeSetStore seed = seed_store();
  const SafeSetStore doubled = extend_safe_set(seed, seed.trajectories());
  EXPECT_EQ(doubled.column_count(), 2 * seed.column_count());
  EXPECT_EQ(doubled.point_matrix().col(0), doubled.point_matrix().col(seed.column_count()));
}

TEST(BuildSafeSet, EmptyListRejected) {
  EXPECT_THROW(build_safe_set({}, double_integrator(), StageCost(study_cost()), OriginMode{}), ValidationError);
}

TEST(BuildSafeSet, NamesTheViolatedAssumption) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  t.inputs.back()(0) = 0.1;
  t.costs_to_go = compute_cost_to_go(t.states, t.inputs, StageCost(study_cost()));
  try {
    build_safe_set({t}, double_integrator(), StageCost(study_cost()), OriginMode{});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("terminal input nonzero"), std::string::npos) << e.what();
  }
}

TEST(BuildSafeSet, BrokenCostToGoRejected) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  t.costs_to_go[3] += 1e-6;
  EXPECT_THROW(build_safe_set({t}, double_integrator(), StageCost(study_cost()), OriginMode{}), ValidationError);
}

TEST(BuildSafeSet, TerminalHullMustMatch) {
  const SafeSetStore demo = make_terminal_demo();
  std::vector<Trajectory> missing(demo.trajectories().begin(), demo.trajectories().begin() + 3);
  EXPECT_THROW(build_safe_set(missing, demo.system(), demo.stage_cost(), demo.mode()), ValidationError);
}

TEST(Validate, ClqrTrajectoryIsClean) {
  const Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  EXPECT_TRUE(validate_trajectory(t, double_integrator(), OriginMode{}).empty());
  const StageCost cost(study_cost());
  EXPECT_TRUE(validate_trajectory(t, double_integrator(), OriginMode{}, 1e-8, &cost).empty());
}

TEST(Validate, TerminalInputNonzero) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  t.inputs.back()(0) = 0.1;
  const auto v = validate_trajectory(t, double_integrator(), OriginMode{});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::TerminalInputNonzero);
  EXPECT_EQ(std::string(to_string(v[0].kind)), "terminal input nonzero");
}

TEST(Validate, TerminalEvolutionLeavesSet) {
  LtiSystem sys;
  sys.a_matrix = Matrix::Identity(2, 2);
  sys.b_matrix = Matrix::Identity(2, 2);
  sys.state_lower = Vector::Constant(2, -5);
  sys.state_upper = Vector::Constant(2, 5);
  sys.input_lower = Vector::Constant(2, -5);
  sys.input_upper = Vector::Constant(2, 5);
  const TerminalSet set{{vec({1, 0}), vec({-1, 0})}};
  const Trajectory t = raw_trajectory({vec({0, 0})}, {vec({2, 0})}, {1.0});
  const auto v = validate_trajectory(t, sys, TerminalSetMode{set});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(std::string(to_string(v[0].kind)), "terminal evolution leaves X_F");
}

TEST(Validate, DynamicsBoxesAndTerminalState) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  Trajectory bad = t;
  bad.states[4](1) += 1e-6;
  bool found = false;
  for (const auto& v : validate_trajectory(bad, double_integrator(), OriginMode{})) {
    found |= v.kind == ViolationKind::DynamicsResidual;
  }
  EXPECT_TRUE(found);

  Trajectory cut = t;
  cut.states.pop_back();
  cut.inputs.pop_back();
  cut.costs_to_go.pop_back();
  cut.inputs.back()(0) = 0.0;
  found = false;
  for (const auto& v : validate_trajectory(cut, double_integrator(), OriginMode{})) {
    found |= v.kind == ViolationKind::TerminalNotAtOrigin;
  }
  EXPECT_TRUE(found);

  Trajectory wide = raw_trajectory(scalars({12, 0}), scalars({-12, 0}), {0, 0});
  const auto v = validate_trajectory(wide, scalar_integrator(20.0), OriginMode{});
  bool box = false;
  for (const auto& x : v) box |= x.kind == ViolationKind::StateBox;
  EXPECT_TRUE(box);
}

TEST(Validate, LengthAndDimensionProblems) {
  EXPECT_EQ(validate_trajectory(Trajectory{}, scalar_integrator(), OriginMode{}).at(0).kind, ViolationKind::Empty);
  const Trajectory t = raw_trajectory(scalars({1, 0}), scalars({-1}), {1, 0});
  EXPECT_EQ(validate_trajectory(t, scalar_integrator(), OriginMode{}).at(0).kind, ViolationKind::LengthMismatch);
  const Trajectory d = raw_trajectory({vec({1, 0})}, scalars({0}), {1});
  EXPECT_EQ(validate_trajectory(d, scalar_integrator(), OriginMode{}).at(0).kind, ViolationKind::DimensionMismatch);
}

TEST(StoreProperty, CostToGoRecursionAndMonotonicity) {
  for (const SafeSetStore& s : {seed_store(), make_terminal_demo(), cli::make_bench_store()}) {
    for (const auto& t : s.trajectories()) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double h = s.stage_cost()(t.states[k], t.inputs[k]);
        const double next = k + 1 < t.size() ? t.costs_to_go[k + 1] : 0.0;
        EXPECT_NEAR(t.costs_to_go[k], h + next, 1e-12 * std::max(1.0, std::abs(t.costs_to_go[k])));
        if (k + 1 < t.size()) {
          EXPECT_GE(t.costs_to_go[k], t.costs_to_go[k + 1]);
        }
      }
    }
  }
}

TEST(StoreProperty, OriginModeTerminalInputsAreExactZero) {
  for (const SafeSetStore& s : {seed_store(), cli::make_bench_store()}) {
    for (const auto& t : s.trajectories()) EXPECT_TRUE((t.inputs.back().array() == 0.0).all());
  }
}

TEST(StoreProperty, ExtendingLeavesTheBaseUntouched) {
  const SafeSetStore base = seed_store();
  const SafeSetStore copy = base;
  const SafeSetStore bigger = extend_safe_set(base, {solve_clqr(double_integrator(), study_cost(), study_second_seed_state())});
  EXPECT_TRUE(base == copy);
  EXPECT_EQ(bigger.trajectories().size(), 2u);
  EXPECT_EQ(base.trajectories().size(), 1u);
}

TEST(StoreProperty, UnvalidatedStoreIsUncertified) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  t.inputs.back()(0) = 0.5;
  const SafeSetStore s = build_safe_set_unvalidated({t}, double_integrator(), StageCost(study_cost()), OriginMode{});
  EXPECT_FALSE(s.certified());
  EXPECT_FALSE(s.validated());
}

TEST(StoreProperty, IndicatorCostIsUncertified) {
  const SafeSetStore s = make_terminal_demo(true);
  EXPECT_TRUE(s.validated());
  EXPECT_FALSE(s.certified());
  EXPECT_TRUE(make_terminal_demo(false).certified());
}

TEST(StageCosts, IndicatorAndDistance) {
  const TerminalSet set = demo_terminal_set();
  const StageCost ind(TerminalSetIndicator{set});
  const StageCost dist(TerminalSetDistance{set});
  EXPECT_EQ(ind(vec({0, 0}), vec({1})), 0.0);
  EXPECT_EQ(ind(vec({3, 0}), vec({0})), 1.0);
  EXPECT_NEAR(dist(vec({0, 0}), vec({0})), 0.0, 1e-12);
  EXPECT_NEAR(dist(vec({2, -0.5}), vec({0})), 1.0, 1e-9);
  EXPECT_FALSE(ind.certified());
  EXPECT_TRUE(dist.certified());
  EXPECT_EQ(ind.name(), "terminal_set_indicator");
}
