#include <algorithm>
#include <cmath>
#include <sstream>

#include "datapolicy/lp.hpp"
#include "datapolicy/safe_set.hpp"
#include "datapolicy/trajectory.hpp"

namespace datapolicy {

namespace {

bool vectors_equal(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size() || a[i] != b[i]) return false;
  }
  return true;
}

bool matrices_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

bool Trajectory::operator==(const Trajectory& other) const {
  return vectors_equal(states, other.states) && vectors_equal(inputs, other.inputs) &&
         costs_to_go == other.costs_to_go;
}

std::vector<double> compute_cost_to_go(const std::vector<Vector>& states,
                                       const std::vector<Vector>& inputs, const StageCost& cost) {
  if (states.size() != inputs.size()) {
    throw DimensionError("cost-to-go: " + std::to_string(states.size()) + " states but " +
                         std::to_string(inputs.size()) + " inputs");
  }
  std::vector<double> ctg(states.size());
  double tail = 0.0;
  for (std::size_t k = states.size(); k-- > 0;) {
    if (k + 1 < states.size()) {
      require_size(states[k].size(), states[k + 1].size(), "cost-to-go: state dimension");
      require_size(inputs[k].size(), inputs[k + 1].size(), "cost-to-go: input dimension");
    }
    tail = cost(states[k], inputs[k]) + tail;
    ctg[k] = tail;
  }
  return ctg;
}

Trajectory make_trajectory(std::vector<Vector> states, std::vector<Vector> inputs,
                           const StageCost& cost) {
  Trajectory t;
  t.costs_to_go = compute_cost_to_go(states, inputs, cost);
  t.states = std::move(states);
  t.inputs = std::move(inputs);
  return t;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Empty:
      return "empty trajectory";
    case ViolationKind::LengthMismatch:
      return "sequence lengths differ";
    case ViolationKind::DimensionMismatch:
      return "dimension mismatch";
    case ViolationKind::NonFinite:
      return "non-finite value";
    case ViolationKind::DynamicsResidual:
      return "dynamics residual exceeds tolerance";
    case ViolationKind::StateBox:
      return "state outside box";
    case ViolationKind::InputBox:
      return "input outside box";
    case ViolationKind::TerminalNotAtOrigin:
      return "terminal state not at origin";
    case ViolationKind::TerminalInputNonzero:
      return "terminal input nonzero";
    case ViolationKind::TerminalStateOutsideSet:
      return "terminal state outside X_F";
    case ViolationKind::TerminalEvolutionLeavesSet:
      return "terminal evolution leaves X_F";
    case ViolationKind::CostToGoRecursion:
      return "cost-to-go recursion broken";
    case ViolationKind::TerminalHullMismatch:
      return "terminal states do not span X_F";
  }
  return "unknown violation";
}

std::string Violation::message() const {
  std::ostringstream os;
  os << to_string(kind) << " at k=" << time;
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

std::vector<Violation> validate_trajectory(const Trajectory& t, const LtiSystem& system,
                                           const SafeSetMode& mode, double tol,
                                           const StageCost* cost) {
  std::vector<Violation> out;
  if (t.states.empty()) {
    out.push_back({ViolationKind::Empty, 0, ""});
    return out;
  }
  if (t.inputs.size() != t.states.size() || t.costs_to_go.size() != t.states.size()) {
    out.push_back({ViolationKind::LengthMismatch, 0,
                   std::to_string(t.states.size()) + " states, " + std::to_string(t.inputs.size()) +
                       " inputs, " + std::to_string(t.costs_to_go.size()) + " costs"});
    return out;
  }
  const Index n = system.state_dim();
  const Index d = system.input_dim();
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    if (t.states[k].size() != n || t.inputs[k].size() != d) {
      out.push_back({ViolationKind::DimensionMismatch, k, ""});
      return out;
    }
    if (!t.states[k].allFinite() || !t.inputs[k].allFinite() || !std::isfinite(t.costs_to_go[k])) {
      out.push_back({ViolationKind::NonFinite, k, ""});
      return out;
    }
  }

  const std::size_t last = t.duration();
  for (std::size_t k = 0; k < last; ++k) {
    const double r = (t.states[k + 1] - step(system, t.states[k], t.inputs[k])).lpNorm<Eigen::Infinity>();
    if (r > tol) out.push_back({ViolationKind::DynamicsResidual, k, "residual " + std::to_string(r)});
  }
  for (std::size_t k = 0; k <= last; ++k) {
    if (!system.state_in_box(t.states[k], tol)) out.push_back({ViolationKind::StateBox, k, ""});
    if (!system.input_in_box(t.inputs[k], tol)) out.push_back({ViolationKind::InputBox, k, ""});
  }

  const Vector& x_end = t.states[last];
  const Vector& u_end = t.inputs[last];
  if (std::holds_alternative<OriginMode>(mode)) {
    if (x_end.squaredNorm() > kOriginEpsilon) {
      out.push_back({ViolationKind::TerminalNotAtOrigin, last,
                     "||x_T||^2 = " + std::to_string(x_end.squaredNorm())});
    }
    if ((u_end.array() != 0.0).any()) out.push_back({ViolationKind::TerminalInputNonzero, last, ""});
  } else {
    const TerminalSet& set = std::get<TerminalSetMode>(mode).set;
    if (!set.contains(x_end, tol)) out.push_back({ViolationKind::TerminalStateOutsideSet, last, ""});
    if (!set.contains(step(system, x_end, u_end), tol)) {
      out.push_back({ViolationKind::TerminalEvolutionLeavesSet, last, ""});
    }
  }

  if (cost != nullptr) {
    for (std::size_t k = 0; k <= last; ++k) {
      const double h = (*cost)(t.states[k], t.inputs[k]);
      const double next = k < last ? t.costs_to_go[k + 1] : 0.0;
      const double scale = std::max(1.0, std::abs(t.costs_to_go[k]));
      if (std::abs(t.costs_to_go[k] - h - next) > 1e-12 * scale) {
        out.push_back({ViolationKind::CostToGoRecursion, k, ""});
      }
    }
  }
  return out;
}

SafeSetStore::SafeSetStore(std::vector<Trajectory> trajectories, LtiSystem system, StageCost cost,
                           SafeSetMode mode, bool validated)
    : trajectories_(std::move(trajectories)),
      system_(std::move(system)),
      cost_(std::move(cost)),
      mode_(std::move(mode)),
      validated_(validated) {
  const Index n = system_.state_dim();
  const Index d = system_.input_dim();
  std::size_t total = 0;
  offsets_.reserve(trajectories_.size());
  for (const auto& t : trajectories_) {
    offsets_.push_back(total);
    total += t.size();
  }
  points_.resize(n, static_cast<Index>(total));
  inputs_.resize(d, static_cast<Index>(total));
  costs_.resize(static_cast<Index>(total));
  stage_costs_.resize(static_cast<Index>(total));
  index_map_.reserve(total);
  Index c = 0;
  for (std::size_t j = 0; j < trajectories_.size(); ++j) {
    const Trajectory& t = trajectories_[j];
    for (std::size_t k = 0; k < t.size(); ++k, ++c) {
      points_.col(c) = t.states[k];
      inputs_.col(c) = t.inputs[k];
      costs_(c) = t.costs_to_go[k];
      stage_costs_(c) = k + 1 < t.size() ? t.costs_to_go[k] - t.costs_to_go[k + 1] : t.costs_to_go[k];
      index_map_.push_back({j, k});
    }
  }
}

std::size_t SafeSetStore::column_of(std::size_t trajectory, std::size_t time) const {
  if (trajectory >= trajectories_.size() || time >= trajectories_[trajectory].size()) {
    throw DimensionError("safe set: (trajectory, time) index out of range");
  }
  return offsets_[trajectory] + time;
}

const TerminalSet* SafeSetStore::terminal_set() const {
  if (const auto* m = std::get_if<TerminalSetMode>(&mode_)) return &m->set;
  return nullptr;
}

std::size_t SafeSetStore::longest_trajectory() const {
  std::size_t best = 0;
  for (const auto& t : trajectories_) best = std::max(best, t.size());
  return best;
}

namespace {

void check_common(const std::vector<Trajectory>& trajectories, const LtiSystem& system,
                  const StageCost& cost, const SafeSetMode& mode) {
  if (trajectories.empty()) throw ValidationError("safe set: at least one trajectory is required");
  system.check();
  if (const auto* q = cost.get_if<QuadStageCost>()) q->check(system.state_dim(), system.input_dim());
  if (const auto* m = std::get_if<TerminalSetMode>(&mode)) {
    if (m->set.vertices.empty()) throw ValidationError("safe set: terminal set has no vertices");
    for (const auto& v : m->set.vertices) require_size(v.size(), system.state_dim(), "terminal vertex");
  }
}

// Assumption: X_F equals the hull of the stored terminal states. Each side's
// points must lie in the other side's hull.
void check_terminal_hull(const std::vector<Trajectory>& trajectories, const TerminalSet& set,
                         double tol) {
  TerminalSet terminal_hull;
  for (const auto& t : trajectories) terminal_hull.vertices.push_back(t.states.back());
  for (std::size_t v = 0; v < set.vertices.size(); ++v) {
    if (!terminal_hull.contains(set.vertices[v], tol)) {
      throw ValidationError(std::string("safe set: ") + to_string(ViolationKind::TerminalHullMismatch) +
                            " (vertex " + std::to_string(v) + " not in hull of terminal states)");
    }
  }
}

}  // namespace

SafeSetStore build_safe_set(std::vector<Trajectory> trajectories, const LtiSystem& system,
                            const StageCost& cost, SafeSetMode mode, double tol) {
  check_common(trajectories, system, cost, mode);
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    const auto violations = validate_trajectory(trajectories[j], system, mode, tol, &cost);
    if (!violations.empty()) {
      throw ValidationError("safe set: trajectory " + std::to_string(j) + ": " +
                            violations.front().message());
    }
  }
  if (const auto* m = std::get_if<TerminalSetMode>(&mode)) check_terminal_hull(trajectories, m->set, tol);
  return SafeSetStore(std::move(trajectories), system, cost, std::move(mode), true);
}

SafeSetStore build_safe_set_unvalidated(std::vector<Trajectory> trajectories,
                                        const LtiSystem& system, const StageCost& cost,
                                        SafeSetMode mode) {
  if (trajectories.empty()) throw ValidationError("safe set: at least one trajectory is required");
  return SafeSetStore(std::move(trajectories), system, cost, std::move(mode), false);
}

SafeSetStore extend_safe_set(const SafeSetStore& base, std::vector<Trajectory> extra, double tol) {
  std::vector<Trajectory> all = base.trajectories();
  all.insert(all.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  if (!base.validated()) {
    return build_safe_set_unvalidated(std::move(all), base.system(), base.stage_cost(), base.mode());
  }
  return build_safe_set(std::move(all), base.system(), base.stage_cost(), base.mode(), tol);
}

namespace {

bool systems_equal(const LtiSystem& a, const LtiSystem& b) {
  return matrices_equal(a.a_matrix, b.a_matrix) && matrices_equal(a.b_matrix, b.b_matrix) &&
         matrices_equal(a.state_lower, b.state_lower) && matrices_equal(a.state_upper, b.state_upper) &&
         matrices_equal(a.input_lower, b.input_lower) && matrices_equal(a.input_upper, b.input_upper);
}

bool sets_equal(const TerminalSet& a, const TerminalSet& b) { return vectors_equal(a.vertices, b.vertices); }

bool costs_equal(const StageCost& a, const StageCost& b) {
  if (a.kind().index() != b.kind().index()) return false;
  if (const auto* q = a.get_if<QuadStageCost>()) {
    const auto* r = b.get_if<QuadStageCost>();
    return matrices_equal(q->state_weight, r->state_weight) &&
           matrices_equal(q->input_weight, r->input_weight);
  }
  if (const auto* q = a.get_if<TerminalSetIndicator>()) {
    return sets_equal(q->set, b.get_if<TerminalSetIndicator>()->set);
  }
  return sets_equal(a.get_if<TerminalSetDistance>()->set, b.get_if<TerminalSetDistance>()->set);
}

bool modes_equal(const SafeSetMode& a, const SafeSetMode& b) {
  if (a.index() != b.index()) return false;
  if (const auto* m = std::get_if<TerminalSetMode>(&a)) {
    return sets_equal(m->set, std::get<TerminalSetMode>(b).set);
  }
  return true;
}

}  // namespace

bool operator==(const SafeSetStore& a, const SafeSetStore& b) {
  return a.validated() == b.validated() && systems_equal(a.system(), b.system()) &&
         costs_equal(a.stage_cost(), b.stage_cost()) && modes_equal(a.mode(), b.mode()) &&
         a.trajectories() == b.trajectories() && matrices_equal(a.point_matrix(), b.point_matrix()) &&
         matrices_equal(a.cost_vector(), b.cost_vector()) && a.index_map() == b.index_map();
}

}  // namespace datapolicy
