#pragma once

#include <vector>

#include "datapolicy/linalg.hpp"
#include "datapolicy/stage_cost.hpp"

namespace datapolicy {

/// One stored rollout x_0..x_T, u_0..u_T with the realized cost-to-go of
/// every state.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<double> costs_to_go;

  std::size_t duration() const { return states.empty() ? 0 : states.size() - 1; }
  std::size_t size() const { return states.size(); }
  double total_cost() const { return costs_to_go.empty() ? 0.0 : costs_to_go.front(); }

  bool operator==(const Trajectory& other) const;
};

/// Backward sums J_k = h(x_k,u_k) + J_{k+1}, J_T = h(x_T,u_T).
std::vector<double> compute_cost_to_go(const std::vector<Vector>& states,
                                       const std::vector<Vector>& inputs, const StageCost& cost);

Trajectory make_trajectory(std::vector<Vector> states, std::vector<Vector> inputs,
                           const StageCost& cost);

}  // namespace datapolicy
