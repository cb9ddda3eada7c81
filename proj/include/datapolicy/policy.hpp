#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "datapolicy/qfunction.hpp"
#include "datapolicy/safe_set.hpp"
#include "datapolicy/system.hpp"

namespace datapolicy {

struct GlobalMode {};

enum class LocalFallback {
  /// Double n_neighbors and retry until every point is selected.
  DoubleNeighbors,
  /// Report PolicyInfeasible as soon as the local LP is infeasible.
  None,
};

struct LocalMode {
  std::size_t n_neighbors = 10;
  LocalFallback fallback = LocalFallback::DoubleNeighbors;
};

using PolicyMode = std::variant<GlobalMode, LocalMode>;

struct PolicyConfig {
  PolicyMode mode = GlobalMode{};
  double feas_tol = kDefaultFeasTol;
  double lyapunov_tol = 1e-7;
  double cost_bound_tol = 1e-6;
  /// Also run verify_candidate_shift at every step (one extra LP per step).
  bool check_candidate_shift = true;

  void check() const;
  bool is_local() const { return std::holds_alternative<LocalMode>(mode); }
};

struct PolicyOutput {
  Vector input;
  QueryResult q;
  bool fallback_used = false;
  /// Number of neighbor doublings needed (0 when the first local LP solved).
  std::size_t fallback_rounds = 0;
};

/// u = sum lambda* u_k^j over the optimal multipliers of the mode's LP.
/// Throws PolicyInfeasible when x is outside the convex safe set (Global) or
/// when the local LP stays infeasible after the fallback.
PolicyOutput policy_eval(const SafeSetStore& store, const Vector& x, const PolicyConfig& config);

struct StepMonitors {
  bool containment = true;
  bool input_box = true;
  bool state_box = true;
  bool lyapunov_decrease = true;
  bool candidate_shift = true;
  bool local_fallback_used = false;
  /// Q(x_{t+1}) - Q(x_t) + sum lambda* h; must stay <= lyapunov_tol.
  double lyapunov_slack = 0.0;
};

struct StepRecord {
  Vector state;
  Vector input;
  double q_value = 0.0;
  double stage_cost = 0.0;
  StepMonitors monitors;
};

enum class Termination { ReachedOrigin, ReachedTerminalSet, MaxSteps, Infeasible };

const char* to_string(Termination t);

struct SimulationReport {
  std::vector<StepRecord> steps;
  double realized_cost = 0.0;
  double initial_q = 0.0;
  Termination terminated = Termination::MaxSteps;
  bool all_monitors_passed = false;
  bool certified = true;
  std::size_t fallback_count = 0;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;

  /// realized_cost <= initial_q + tol.
  bool cost_bound_holds(double tol) const { return realized_cost <= initial_q + tol; }
};

inline constexpr std::size_t kDefaultMaxSteps = 500;

/// Closed loop x+ = A x + B pi(x) from x0 until the goal is reached
/// (origin: ||x||^2 <= 1e-10; terminal set: x in X_F with Q <= feas_tol) or
/// max_steps. The last record holds the goal state with the terminal input.
///
/// Monitors per step: containment of x_{t+1} in the convex safe set, input
/// and state boxes, and Q(x_{t+1}) - Q(x_t) <= -sum lambda* h + lyapunov_tol.
/// Lyapunov failures are warnings for uncertified stores and in Local mode.
/// Throws PolicyInfeasible if x0 is outside the safe set.
SimulationReport run_closed_loop(const LtiSystem& system, const SafeSetStore& store, const Vector& x0,
                                 const PolicyConfig& config, std::size_t max_steps = kDefaultMaxSteps);

/// The shifted multipliers from the feasibility argument, expressed over all
/// store columns. Origin mode moves terminal mass onto x_T; terminal-set mode
/// spreads it over the terminal states that reproduce A x_T + B u_T.
Vector candidate_shift(const SafeSetStore& store, const QueryResult& q_at_t,
                       double feas_tol = kDefaultFeasTol);

/// Checks that candidate_shift(q_at_t) is feasible for the LP at
/// x_{t+1} = A x_t + B pi(x_t) and that its cost upper-bounds Q(x_{t+1}).
///
/// In origin mode the stored x_T is only epsilon-close to the origin, so the
/// interpolation residual may additionally include
/// sum_j lambda*_{T_j} ||A x_{T_j} - x_{T_j}||_inf; a nonzero terminal input
/// is not covered by this allowance.
bool verify_candidate_shift(const SafeSetStore& store, const QueryResult& q_at_t,
                            double feas_tol = kDefaultFeasTol);

/// Converts a finished run into a storable trajectory (costs recomputed with
/// the store's stage cost). Origin-mode runs get u_T = 0.
Trajectory report_to_trajectory(const SimulationReport& report, const SafeSetStore& store);

}  // namespace datapolicy
