#pragma once

#include "datapolicy/linalg.hpp"

namespace datapolicy {

/// x+ = A x + B u with box constraints on state and input.
struct LtiSystem {
  Matrix a_matrix;
  Matrix b_matrix;
  Vector state_lower;
  Vector state_upper;
  Vector input_lower;
  Vector input_upper;

  Index state_dim() const { return a_matrix.rows(); }
  Index input_dim() const { return b_matrix.cols(); }

  /// Throws DimensionError / Error when shapes or bounds are inconsistent,
  /// including when the origin is not strictly inside both boxes.
  void check() const;

  bool state_in_box(const Vector& x, double tol) const;
  bool input_in_box(const Vector& u, double tol) const;
};

/// A x + B u.
Vector step(const LtiSystem& system, const Vector& x, const Vector& u);

/// The double integrator A = [[1,1],[0,1]], B = [0,1]' with |x| <= 10 and
/// |u| <= 1 componentwise.
LtiSystem double_integrator();

}  // namespace datapolicy
