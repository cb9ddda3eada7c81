#pragma once

#include <vector>

#include "datapolicy/safe_set.hpp"

namespace datapolicy {

/// Quadrilateral around the origin with vertices (1,-0.5), (-1,0.5),
/// (0.25,0.25), (-0.25,-0.25).
TerminalSet demo_terminal_set();

/// Double-integrator dataset in terminal-set mode: eight trajectories steered
/// by minimum-norm N-step inputs onto the vertices of demo_terminal_set(),
/// each ending with an input that keeps A x_T + B u_T inside X_F. The stage
/// cost is the L1 distance to X_F unless `indicator_cost` is set, in which
/// case the store is uncertified.
SafeSetStore make_terminal_demo(bool indicator_cost = false, int steering_steps = 12);

/// Initial states of the demo runs: every stored x_0 plus a few interior
/// convex combinations.
std::vector<Vector> terminal_demo_initial_states(const SafeSetStore& demo);

}  // namespace datapolicy
