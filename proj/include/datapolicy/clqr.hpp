#pragma once

#include "datapolicy/linalg.hpp"
#include "datapolicy/stage_cost.hpp"
#include "datapolicy/system.hpp"
#include "datapolicy/trajectory.hpp"

namespace datapolicy {

struct ClqrConfig {
  double epsilon = 1e-10;   // ||x_T||^2 threshold that ends the task
  int initial_horizon = 20;
  int max_horizon = 400;
  double qp_tol = 1e-10;    // projected-gradient infinity norm
  int qp_max_iters = 2000000;
  /// Append append_origin_tail() after the epsilon truncation.
  bool exact_terminal = false;
};

/// Details of one condensed QP solve, exposed for diagnostics and tests.
struct ClqrQpResult {
  Vector inputs;            // stacked u_0 .. u_{H-1}
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  int horizon = 0;
};

/// Minimizes sum_{k=0}^{H} x'Qx + sum_{k=0}^{H-1} u'Ru over the input box for
/// a fixed horizon H, by accelerated projected gradient with adaptive restart
/// and an active-set Newton polish. Throws QpStalled if qp_tol is not reached
/// within qp_max_iters.
ClqrQpResult solve_condensed_qp(const LtiSystem& system, const QuadStageCost& cost, const Vector& x0,
                                int horizon, const ClqrConfig& config);

/// Constrained LQR trajectory from x0, truncated at the first T with
/// ||x_T||^2 <= epsilon and with u_T = 0. The horizon starts at
/// initial_horizon and doubles until ||x_H||^2 <= epsilon.
///
/// Throws NoConvergence when max_horizon is exceeded, StateConstraintActive
/// when the solution touches the state box, QpStalled from the inner QP.
Trajectory solve_clqr(const LtiSystem& system, const QuadStageCost& cost, const Vector& x0,
                      const ClqrConfig& config = {});

/// Extends a trajectory whose last state is near the origin by the
/// minimum-norm n-step input sequence that reaches the origin exactly, then
/// stores the final state as the exact zero vector with u_T = 0. Throws
/// NumericError when (A, B) is not controllable in n steps and Error when
/// the tail would leave the boxes.
Trajectory append_origin_tail(const Trajectory& trajectory, const LtiSystem& system,
                              const StageCost& cost, double tol = 1e-8);

/// Infinite-horizon LQR gain K (u = -K x) by Riccati fixed-point iteration.
Matrix riccati_lqr(const LtiSystem& system, const QuadStageCost& cost, double tol = 1e-12,
                   int max_iters = 100000);

}  // namespace datapolicy
