#include "datapolicy/study.hpp"

namespace datapolicy {

QuadStageCost study_cost(double input_weight) {
  QuadStageCost c = QuadStageCost::identity(2, 1);
  c.input_weight *= input_weight;
  return c;
}

Vector study_seed_state() { return (Vector(2) << -1.0, 3.0).finished(); }

Vector study_second_seed_state() { return (Vector(2) << 2.9033, 1.2959).finished(); }

std::vector<Vector> study_initial_states() {
  const double rows[][2] = {{-1.0, 3.0},       {2.9033, 1.2959}, {3.9495, 0.3921}, {3.3673, 0.8315},
                            {3.4349, 0.7243},  {3.9253, 0.0874}, {3.1189, 0.9013}, {3.8963, 0.1645},
                            {2.5449, 1.0898},  {3.4751, 0.6212}, {2.5770, 1.1763}};
  std::vector<Vector> out;
  for (const auto& r : rows) out.push_back((Vector(2) << r[0], r[1]).finished());
  return out;
}

ClqrConfig study_clqr_config() {
  ClqrConfig c;
  c.exact_terminal = true;
  return c;
}

SafeSetStore seed_store(const Vector& x0, double input_weight, const ClqrConfig& config) {
  const LtiSystem sys = double_integrator();
  const QuadStageCost cost = study_cost(input_weight);
  Trajectory t = solve_clqr(sys, cost, x0, config);
  return build_safe_set({std::move(t)}, sys, cost, OriginMode{});
}

}  // namespace datapolicy
