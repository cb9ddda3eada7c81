#pragma once

#include <string>
#include <variant>
#include <vector>

#include "datapolicy/linalg.hpp"

namespace datapolicy {

/// h(x,u) = x'Qx + u'Ru.
struct QuadStageCost {
  Matrix state_weight;
  Matrix input_weight;

  static QuadStageCost identity(Index state_dim, Index input_dim);

  /// Throws unless Q is symmetric PSD and R symmetric PD (symmetry to 1e-12).
  void check(Index state_dim, Index input_dim) const;
  double operator()(const Vector& x, const Vector& u) const;
};

/// Convex hull of a vertex list.
struct TerminalSet {
  std::vector<Vector> vertices;

  Index dim() const;
  Matrix vertex_matrix() const;
  bool contains(const Vector& x, double tol) const;
  /// L1 distance from x to the hull, via the slack LP
  /// min 1's  s.t.  V mu + s+ - s- = x, 1'mu = 1, mu, s+, s- >= 0.
  double l1_distance(const Vector& x) const;
};

/// 0 inside X_F, 1 outside. Discontinuous, so datasets using it are
/// uncertified.
struct TerminalSetIndicator {
  TerminalSet set;
};

/// L1 distance to X_F: continuous, convex, zero exactly on X_F.
struct TerminalSetDistance {
  TerminalSet set;
};

class StageCost {
 public:
  using Kind = std::variant<QuadStageCost, TerminalSetIndicator, TerminalSetDistance>;

  StageCost(QuadStageCost cost) : kind_(std::move(cost)) {}  // NOLINT(google-explicit-constructor)
  StageCost(TerminalSetIndicator cost) : kind_(std::move(cost)) {}  // NOLINT
  StageCost(TerminalSetDistance cost) : kind_(std::move(cost)) {}  // NOLINT

  double operator()(const Vector& x, const Vector& u) const;
  const Kind& kind() const { return kind_; }
  /// False for the indicator cost: the Lyapunov argument needs a continuous h.
  bool certified() const;
  std::string name() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&kind_);
  }

 private:
  Kind kind_;
};

}  // namespace datapolicy
