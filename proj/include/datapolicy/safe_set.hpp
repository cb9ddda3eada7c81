#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "datapolicy/linalg.hpp"
#include "datapolicy/stage_cost.hpp"
#include "datapolicy/system.hpp"
#include "datapolicy/trajectory.hpp"

namespace datapolicy {

/// Threshold on ||x_T||^2 that counts as "at the origin".
inline constexpr double kOriginEpsilon = 1e-10;
inline constexpr double kDefaultValidationTol = 1e-8;

struct OriginMode {};
struct TerminalSetMode {
  TerminalSet set;
};
using SafeSetMode = std::variant<OriginMode, TerminalSetMode>;

enum class ViolationKind {
  Empty,
  LengthMismatch,
  DimensionMismatch,
  NonFinite,
  DynamicsResidual,
  StateBox,
  InputBox,
  TerminalNotAtOrigin,
  TerminalInputNonzero,
  TerminalStateOutsideSet,
  TerminalEvolutionLeavesSet,
  CostToGoRecursion,
  TerminalHullMismatch,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::size_t time = 0;
  std::string detail;

  std::string message() const;
};

/// Checks dynamics consistency, box constraints and the terminal condition of
/// the mode (origin: ||x_T||^2 <= 1e-10 and u_T == 0 exactly; terminal set:
/// x_T and A x_T + B u_T in X_F). With a cost, also the cost-to-go recursion
/// to 1e-12 (relative to the magnitude of J). Violations are returned, not
/// thrown.
std::vector<Violation> validate_trajectory(const Trajectory& trajectory, const LtiSystem& system,
                                           const SafeSetMode& mode,
                                           double tol = kDefaultValidationTol,
                                           const StageCost* cost = nullptr);

struct PointIndex {
  std::size_t trajectory = 0;
  std::size_t time = 0;

  bool operator==(const PointIndex&) const = default;
};

/// Flattened, immutable sampled safe set. Column c of point_matrix() is
/// trajectories()[j].states[k] for {j, k} = index_map()[c].
class SafeSetStore {
 public:
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  const Matrix& point_matrix() const { return points_; }
  const Matrix& input_matrix() const { return inputs_; }
  const Vector& cost_vector() const { return costs_; }
  /// h(x_k^j, u_k^j) per column.
  const Vector& stage_costs() const { return stage_costs_; }
  const std::vector<PointIndex>& index_map() const { return index_map_; }
  std::size_t column_of(std::size_t trajectory, std::size_t time) const;
  Index column_count() const { return points_.cols(); }
  std::size_t trajectory_offset(std::size_t trajectory) const { return offsets_[trajectory]; }
  const SafeSetMode& mode() const { return mode_; }
  const TerminalSet* terminal_set() const;
  const LtiSystem& system() const { return system_; }
  const StageCost& stage_cost() const { return cost_; }
  /// False when the stage cost is the indicator or validation was bypassed.
  bool certified() const { return validated_ && cost_.certified(); }
  /// True when built through build_safe_set (every assumption checked).
  bool validated() const { return validated_; }
  Index state_dim() const { return points_.rows(); }
  Index input_dim() const { return inputs_.rows(); }
  std::size_t longest_trajectory() const;

  friend SafeSetStore build_safe_set(std::vector<Trajectory>, const LtiSystem&, const StageCost&,
                                     SafeSetMode, double);
  friend SafeSetStore build_safe_set_unvalidated(std::vector<Trajectory>, const LtiSystem&,
                                                 const StageCost&, SafeSetMode);

 private:
  SafeSetStore(std::vector<Trajectory> trajectories, LtiSystem system, StageCost cost,
               SafeSetMode mode, bool validated);

  std::vector<Trajectory> trajectories_;
  LtiSystem system_;
  StageCost cost_;
  SafeSetMode mode_;
  bool validated_;
  Matrix points_;
  Matrix inputs_;
  Vector costs_;
  Vector stage_costs_;
  std::vector<PointIndex> index_map_;
  std::vector<std::size_t> offsets_;
};

/// Validates every trajectory (including the cost-to-go recursion against
/// `cost`) and flattens them. Throws ValidationError naming the first
/// violated assumption; an empty list is rejected.
SafeSetStore build_safe_set(std::vector<Trajectory> trajectories, const LtiSystem& system,
                            const StageCost& cost, SafeSetMode mode,
                            double tol = kDefaultValidationTol);

/// Builds without checking any assumption; the store is marked uncertified.
/// Used to demonstrate what breaks when the assumptions do not hold.
SafeSetStore build_safe_set_unvalidated(std::vector<Trajectory> trajectories,
                                        const LtiSystem& system, const StageCost& cost,
                                        SafeSetMode mode);

/// A new store holding `base`'s trajectories followed by `extra`.
SafeSetStore extend_safe_set(const SafeSetStore& base, std::vector<Trajectory> extra,
                             double tol = kDefaultValidationTol);

bool operator==(const SafeSetStore& a, const SafeSetStore& b);

}  // namespace datapolicy
