#include "datapolicy/system.hpp"

namespace datapolicy {

void LtiSystem::check() const {
  const Index n = a_matrix.rows();
  if (n < 1 || a_matrix.cols() != n) throw DimensionError("system: A must be square and non-empty");
  require_size(b_matrix.rows(), n, "system: rows of B");
  if (b_matrix.cols() < 1) throw DimensionError("system: B must have at least one column");
  const Index d = b_matrix.cols();
  require_size(state_lower.size(), n, "system: state_lower");
  require_size(state_upper.size(), n, "system: state_upper");
  require_size(input_lower.size(), d, "system: input_lower");
  require_size(input_upper.size(), d, "system: input_upper");
  require_finite(a_matrix, "system: A");
  require_finite(b_matrix, "system: B");
  if (!((state_lower.array() < 0.0).all() && (state_upper.array() > 0.0).all())) {
    throw Error("system: the origin must lie strictly inside the state box");
  }
  if (!((input_lower.array() < 0.0).all() && (input_upper.array() > 0.0).all())) {
    throw Error("system: zero input must lie strictly inside the input box");
  }
}

bool LtiSystem::state_in_box(const Vector& x, double tol) const {
  return ((x - state_lower).array() >= -tol).all() && ((state_upper - x).array() >= -tol).all();
}

bool LtiSystem::input_in_box(const Vector& u, double tol) const {
  return ((u - input_lower).array() >= -tol).all() && ((input_upper - u).array() >= -tol).all();
}

Vector step(const LtiSystem& system, const Vector& x, const Vector& u) {
  require_size(x.size(), system.state_dim(), "step: state");
  require_size(u.size(), system.input_dim(), "step: input");
  return system.a_matrix * x + system.b_matrix * u;
}

LtiSystem double_integrator() {
  LtiSystem s;
  s.a_matrix = (Matrix(2, 2) << 1.0, 1.0, 0.0, 1.0).finished();
  s.b_matrix = (Matrix(2, 1) << 0.0, 1.0).finished();
  s.state_lower = Vector::Constant(2, -10.0);
  s.state_upper = Vector::Constant(2, 10.0);
  s.input_lower = Vector::Constant(1, -1.0);
  s.input_upper = Vector::Constant(1, 1.0);
  return s;
}

}  // namespace datapolicy
