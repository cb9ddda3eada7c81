#include "datapolicy/terminal_demo.hpp"

namespace datapolicy {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// u = C'(CC')^{-1}(v - A^N x0) with C = [A^{N-1}B ... AB B].
std::vector<Vector> steer(const LtiSystem& sys, const Vector& x0, const Vector& target, int steps) {
  const Index n = sys.state_dim();
  const Index d = sys.input_dim();
  Matrix reach(n, steps * d);
  Matrix power = Matrix::Identity(n, n);
  for (int k = steps - 1; k >= 0; --k) {
    reach.middleCols(k * d, d) = power * sys.b_matrix;
    power = sys.a_matrix * power;
  }
  const Vector gap = target - power * x0;
  const Vector u = reach.transpose() * (reach * reach.transpose()).ldlt().solve(gap);
  std::vector<Vector> out;
  for (int k = 0; k < steps; ++k) out.push_back(u.segment(k * d, d));
  return out;
}

}  // namespace

TerminalSet demo_terminal_set() {
  return TerminalSet{{vec2(1.0, -0.5), vec2(-1.0, 0.5), vec2(0.25, 0.25), vec2(-0.25, -0.25)}};
}

SafeSetStore make_terminal_demo(bool indicator_cost, int steering_steps) {
  const LtiSystem sys = double_integrator();
  const TerminalSet set = demo_terminal_set();
  const std::vector<double> terminal_inputs{0.3, -0.3, -0.45, 0.45};
  const std::vector<Vector> starts{vec2(4, 0),  vec2(-4, 0), vec2(3, -2), vec2(-3, 2),
                                   vec2(0, 3),  vec2(0, -3), vec2(5, -1), vec2(-5, 1)};
  const StageCost cost = indicator_cost ? StageCost(TerminalSetIndicator{set}) : StageCost(TerminalSetDistance{set});

  std::vector<Trajectory> trajs;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    const std::size_t v = j % set.vertices.size();
    std::vector<Vector> inputs = steer(sys, starts[j], set.vertices[v], steering_steps);
    std::vector<Vector> states{starts[j]};
    for (const auto& u : inputs) states.push_back(step(sys, states.back(), u));
    states.back() = set.vertices[v];
    inputs.push_back(Vector::Constant(1, terminal_inputs[v]));
    trajs.push_back(make_trajectory(std::move(states), std::move(inputs), cost));
  }
  return build_safe_set(std::move(trajs), sys, cost, TerminalSetMode{set});
}

std::vector<Vector> terminal_demo_initial_states(const SafeSetStore& demo) {
  std::vector<Vector> out;
  const auto& trajs = demo.trajectories();
  for (const auto& t : trajs) out.push_back(t.states.front());
  for (std::size_t j = 0; j + 1 < trajs.size(); j += 2) {
    out.push_back(0.5 * trajs[j].states.front() + 0.5 * trajs[j + 1].states[2]);
  }
  out.push_back(0.6 * trajs[0].states[3] + 0.4 * trajs[2].states[5]);
  return out;
}

}  // namespace datapolicy
