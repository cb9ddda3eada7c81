#include "datapolicy/stage_cost.hpp"

#include <cmath>

#include "datapolicy/lp.hpp"

namespace datapolicy {

QuadStageCost QuadStageCost::identity(Index state_dim, Index input_dim) {
  return {Matrix::Identity(state_dim, state_dim), Matrix::Identity(input_dim, input_dim)};
}

void QuadStageCost::check(Index state_dim, Index input_dim) const {
  if (state_weight.rows() != state_dim || state_weight.cols() != state_dim) {
    throw DimensionError("quadratic cost: state_weight must be " + std::to_string(state_dim) +
                         "x" + std::to_string(state_dim));
  }
  if (input_weight.rows() != input_dim || input_weight.cols() != input_dim) {
    throw DimensionError("quadratic cost: input_weight must be " + std::to_string(input_dim) +
                         "x" + std::to_string(input_dim));
  }
  require_finite(state_weight, "quadratic cost: state_weight");
  require_finite(input_weight, "quadratic cost: input_weight");
  if ((state_weight - state_weight.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("quadratic cost: state_weight is not symmetric");
  }
  if ((input_weight - input_weight.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("quadratic cost: input_weight is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> q_eig(state_weight);
  if (q_eig.eigenvalues().minCoeff() < -1e-12) {
    throw Error("quadratic cost: state_weight is not positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> r_eig(input_weight);
  if (!(r_eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error("quadratic cost: input_weight is not positive definite");
  }
}

double QuadStageCost::operator()(const Vector& x, const Vector& u) const {
  return x.dot(state_weight * x) + u.dot(input_weight * u);
}

Index TerminalSet::dim() const { return vertices.empty() ? 0 : vertices.front().size(); }

Matrix TerminalSet::vertex_matrix() const {
  Matrix v(dim(), static_cast<Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) v.col(static_cast<Index>(i)) = vertices[i];
  return v;
}

namespace {

Matrix hull_system(const Matrix& vertices) {
  Matrix e(vertices.rows() + 1, vertices.cols());
  e.row(0).setOnes();
  e.bottomRows(vertices.rows()) = vertices;
  return e;
}

Vector hull_rhs(const Vector& x) {
  Vector b(x.size() + 1);
  b(0) = 1.0;
  b.tail(x.size()) = x;
  return b;
}

}  // namespace

bool TerminalSet::contains(const Vector& x, double tol) const {
  if (vertices.empty()) throw Error("terminal set: no vertices");
  require_size(x.size(), dim(), "terminal set membership");
  return lp_feasible(hull_system(vertex_matrix()), hull_rhs(x), tol);
}

double TerminalSet::l1_distance(const Vector& x) const {
  if (vertices.empty()) throw Error("terminal set: no vertices");
  require_size(x.size(), dim(), "terminal set distance");
  const Index n = dim();
  const Index m = static_cast<Index>(vertices.size());
  LpProblem lp;
  lp.eq_matrix = Matrix::Zero(n + 1, m + 2 * n);
  lp.eq_matrix.leftCols(m) = hull_system(vertex_matrix());
  lp.eq_matrix.block(1, m, n, n) = Matrix::Identity(n, n);
  lp.eq_matrix.block(1, m + n, n, n) = -Matrix::Identity(n, n);
  lp.eq_rhs = hull_rhs(x);
  lp.cost = Vector::Zero(m + 2 * n);
  lp.cost.tail(2 * n).setOnes();
  const LpSolution sol = simplex_solve(lp);
  if (!sol.optimal()) throw NumericError("terminal set distance: slack LP did not solve");
  return std::max(sol.objective, 0.0);
}

double StageCost::operator()(const Vector& x, const Vector& u) const {
  struct Visitor {
    const Vector& x;
    const Vector& u;
    double operator()(const QuadStageCost& c) const { return c(x, u); }
    double operator()(const TerminalSetIndicator& c) const {
      return c.set.contains(x, kDefaultFeasTol) ? 0.0 : 1.0;
    }
    double operator()(const TerminalSetDistance& c) const { return c.set.l1_distance(x); }
  };
  return std::visit(Visitor{x, u}, kind_);
}

bool StageCost::certified() const { return !std::holds_alternative<TerminalSetIndicator>(kind_); }

std::string StageCost::name() const {
  if (std::holds_alternative<QuadStageCost>(kind_)) return "quadratic";
  if (std::holds_alternative<TerminalSetIndicator>(kind_)) return "terminal_set_indicator";
  return "terminal_set_distance";
}

}  // namespace datapolicy
