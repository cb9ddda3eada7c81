#include "datapolicy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace datapolicy {

void PolicyConfig::check() const {
  if (!(feas_tol > 0.0) || !(lyapunov_tol > 0.0) || !(cost_bound_tol > 0.0)) {
    throw Error("policy: tolerances must be positive");
  }
  if (const auto* local = std::get_if<LocalMode>(&mode); local != nullptr && local->n_neighbors < 1) {
    throw Error("policy: n_neighbors must be at least 1");
  }
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedOrigin:
      return "reached_origin";
    case Termination::ReachedTerminalSet:
      return "reached_terminal_set";
    case Termination::MaxSteps:
      return "max_steps";
    case Termination::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

std::string format_state(const Vector& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

}  // namespace

PolicyOutput policy_eval(const SafeSetStore& store, const Vector& x, const PolicyConfig& config) {
  config.check();
  PolicyOutput out;
  if (const auto* local = std::get_if<LocalMode>(&config.mode)) {
    const std::size_t longest = store.longest_trajectory();
    std::size_t n = local->n_neighbors;
    out.q = eval_q_local(store, x, n, config.feas_tol);
    while (!out.q.feasible) {
      if (local->fallback == LocalFallback::None) {
        throw PolicyInfeasible("policy: local LP infeasible at " + format_state(x));
      }
      if (n >= longest) {
        throw PolicyInfeasible("policy: " + format_state(x) +
                               " is outside the convex safe set (local fallback exhausted)");
      }
      n = std::min(2 * n, longest);
      ++out.fallback_rounds;
      out.q = eval_q_local(store, x, n, config.feas_tol);
    }
    out.fallback_used = out.fallback_rounds > 0;
  } else {
    out.q = eval_q_global(store, x, config.feas_tol);
    if (!out.q.feasible) {
      throw PolicyInfeasible("policy: " + format_state(x) + " is outside the convex safe set");
    }
  }
  out.input = out.q.combine(store.input_matrix());
  return out;
}

Vector candidate_shift(const SafeSetStore& store, const QueryResult& q, double feas_tol) {
  const Index n = store.state_dim();
  Vector shifted = Vector::Zero(store.column_count());
  const TerminalSet* set = store.terminal_set();

  Matrix terminal_states;
  std::vector<Index> terminal_cols;
  if (set != nullptr) {
    const auto& trajs = store.trajectories();
    terminal_states.resize(n, static_cast<Index>(trajs.size()));
    for (std::size_t j = 0; j < trajs.size(); ++j) {
      terminal_cols.push_back(static_cast<Index>(store.column_of(j, trajs[j].duration())));
      terminal_states.col(static_cast<Index>(j)) = trajs[j].states.back();
    }
  }

  for (std::size_t c = 0; c < q.columns.size(); ++c) {
    const double w = q.multipliers(static_cast<Index>(c));
    if (w == 0.0) continue;
    const PointIndex& at = store.index_map()[static_cast<std::size_t>(q.columns[c])];
    const std::size_t last = store.trajectories()[at.trajectory].duration();
    if (at.time < last) {
      shifted(static_cast<Index>(store.column_of(at.trajectory, at.time + 1))) += w;
      continue;
    }
    const Index own_terminal = q.columns[c];
    if (set == nullptr) {
      shifted(own_terminal) += w;
      continue;
    }
    // Express A x_T + B u_T as a convex combination of stored terminal states.
    const Vector next = step(store.system(), store.point_matrix().col(own_terminal),
                             store.input_matrix().col(own_terminal));
    LpProblem lp;
    lp.cost = Vector::Zero(terminal_states.cols());
    lp.eq_matrix.resize(n + 1, terminal_states.cols());
    lp.eq_matrix.row(0).setOnes();
    lp.eq_matrix.bottomRows(n) = terminal_states;
    lp.eq_rhs.resize(n + 1);
    lp.eq_rhs(0) = 1.0;
    lp.eq_rhs.tail(n) = next;
    const LpSolution mix = simplex_solve(lp, feas_tol);
    if (!mix.optimal()) {
      shifted(own_terminal) += w;
      continue;
    }
    for (std::size_t i = 0; i < terminal_cols.size(); ++i) {
      shifted(terminal_cols[i]) += w * mix.multipliers(static_cast<Index>(i));
    }
  }
  return shifted;
}

bool verify_candidate_shift(const SafeSetStore& store, const QueryResult& q, double feas_tol) {
  if (!q.feasible) return false;
  const LtiSystem& sys = store.system();
  const Vector u = q.combine(store.input_matrix());
  const Vector next = step(sys, q.query, u);
  const Vector shifted = candidate_shift(store, q, feas_tol);

  double allowance = 0.0;
  if (store.terminal_set() == nullptr) {
    for (std::size_t c = 0; c < q.columns.size(); ++c) {
      const PointIndex& at = store.index_map()[static_cast<std::size_t>(q.columns[c])];
      if (at.time != store.trajectories()[at.trajectory].duration()) continue;
      const Vector x_end = store.point_matrix().col(q.columns[c]);
      allowance += std::max(0.0, q.multipliers(static_cast<Index>(c))) *
                   (sys.a_matrix * x_end - x_end).lpNorm<Eigen::Infinity>();
    }
  }

  if (shifted.size() > 0 && shifted.minCoeff() < -feas_tol) return false;
  if (std::abs(shifted.sum() - 1.0) > feas_tol) return false;
  const double residual = (store.point_matrix() * shifted - next).lpNorm<Eigen::Infinity>();
  if (residual > feas_tol + allowance) return false;

  const QueryResult q_next = eval_q_global(store, next, feas_tol);
  if (!q_next.feasible) return false;
  const double candidate_cost = store.cost_vector().dot(shifted);
  return q_next.value <= candidate_cost + feas_tol * (1.0 + std::abs(candidate_cost));
}

namespace {

bool goal_reached(const SafeSetStore& store, const Vector& x, const QueryResult& q, double feas_tol) {
  if (const TerminalSet* set = store.terminal_set()) {
    return q.value <= feas_tol && set->contains(x, feas_tol);
  }
  return x.squaredNorm() <= kOriginEpsilon;
}

double weighted_stage_cost(const SafeSetStore& store, const QueryResult& q) {
  double s = 0.0;
  for (std::size_t c = 0; c < q.columns.size(); ++c) {
    s += q.multipliers(static_cast<Index>(c)) * store.stage_costs()(q.columns[c]);
  }
  return s;
}

Vector clamp_to_box(const LtiSystem& sys, const Vector& u) {
  return u.cwiseMax(sys.input_lower).cwiseMin(sys.input_upper);
}

}  // namespace

SimulationReport run_closed_loop(const LtiSystem& system, const SafeSetStore& store, const Vector& x0,
                                 const PolicyConfig& config, std::size_t max_steps) {
  config.check();
  system.check();
  require_size(system.state_dim(), store.state_dim(), "closed loop: state dimension");
  require_size(system.input_dim(), store.input_dim(), "closed loop: input dimension");

  SimulationReport report;
  const bool local = config.is_local();
  report.certified = store.certified() && !local;
  const bool origin_mode = store.terminal_set() == nullptr;

  PolicyOutput current = policy_eval(store, x0, config);
  report.initial_q = current.q.value;
  if (current.fallback_used) ++report.fallback_count;
  Vector x = x0;

  auto fail = [&](const char* what, bool hard) {
    std::ostringstream os;
    os << what << " at t=" << report.steps.size();
    (hard ? report.failures : report.warnings).push_back(os.str());
  };

  for (std::size_t t = 0;; ++t) {
    StepRecord rec;
    rec.state = x;
    rec.q_value = current.q.value;
    rec.monitors.local_fallback_used = current.fallback_used;

    if (goal_reached(store, x, current.q, config.feas_tol)) {
      rec.input = origin_mode ? Vector::Zero(system.input_dim()) : clamp_to_box(system, current.input);
      rec.stage_cost = store.stage_cost()(x, rec.input);
      report.realized_cost += rec.stage_cost;
      report.steps.push_back(std::move(rec));
      report.terminated = origin_mode ? Termination::ReachedOrigin : Termination::ReachedTerminalSet;
      break;
    }
    if (t >= max_steps) {
      report.terminated = Termination::MaxSteps;
      report.failures.push_back("goal not reached within " + std::to_string(max_steps) + " steps");
      break;
    }

    rec.monitors.input_box = system.input_in_box(current.input, config.feas_tol);
    if (!rec.monitors.input_box) fail("input outside box", true);
    rec.input = clamp_to_box(system, current.input);
    rec.monitors.state_box = system.state_in_box(x, config.feas_tol);
    if (!rec.monitors.state_box) fail("state outside box", true);
    rec.stage_cost = store.stage_cost()(x, rec.input);

    if (config.check_candidate_shift) {
      rec.monitors.candidate_shift = verify_candidate_shift(store, current.q, config.feas_tol);
      if (!rec.monitors.candidate_shift) fail("candidate shift not feasible", report.certified);
    }

    const Vector x_next = step(system, x, rec.input);
    PolicyOutput next;
    try {
      next = policy_eval(store, x_next, config);
    } catch (const PolicyInfeasible& e) {
      rec.monitors.containment = contains(store, x_next, config.feas_tol);
      if (!rec.monitors.containment) fail("next state outside convex safe set", true);
      report.failures.push_back(e.what());
      report.realized_cost += rec.stage_cost;
      report.steps.push_back(std::move(rec));
      report.terminated = Termination::Infeasible;
      break;
    }
    rec.monitors.containment = next.q.feasible;

    const double decrease = weighted_stage_cost(store, current.q);
    rec.monitors.lyapunov_slack = next.q.value - current.q.value + decrease;
    rec.monitors.lyapunov_decrease = rec.monitors.lyapunov_slack <= config.lyapunov_tol;
    if (!rec.monitors.lyapunov_decrease) fail("Lyapunov decrease violated", report.certified);

    if (next.fallback_used) ++report.fallback_count;
    report.realized_cost += rec.stage_cost;
    report.steps.push_back(std::move(rec));
    current = std::move(next);
    x = x_next;
  }

  const bool at_goal = report.terminated == Termination::ReachedOrigin ||
                       report.terminated == Termination::ReachedTerminalSet;
  if (at_goal && !report.cost_bound_holds(config.cost_bound_tol)) {
    (report.certified ? report.failures : report.warnings)
        .push_back("realized cost exceeds Q(x0) + cost_bound_tol");
  }
  report.all_monitors_passed = at_goal && report.failures.empty();
  return report;
}

Trajectory report_to_trajectory(const SimulationReport& report, const SafeSetStore& store) {
  if (report.terminated != Termination::ReachedOrigin &&
      report.terminated != Termination::ReachedTerminalSet) {
    throw Error("report_to_trajectory: run did not reach the goal");
  }
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  for (const auto& s : report.steps) {
    states.push_back(s.state);
    inputs.push_back(s.input);
  }
  return make_trajectory(std::move(states), std::move(inputs), store.stage_cost());
}

}  // namespace datapolicy
