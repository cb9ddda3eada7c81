#pragma once

#include <vector>

#include "datapolicy/linalg.hpp"

namespace datapolicy {

inline constexpr double kDefaultFeasTol = 1e-9;
inline constexpr double kDefaultPivotTol = 1e-10;

/// min cost' * lambda  s.t.  eq_matrix * lambda = eq_rhs,  lambda >= 0.
struct LpProblem {
  Vector cost;
  Matrix eq_matrix;
  Vector eq_rhs;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

/// multipliers, objective and basis are only meaningful when status is
/// Optimal.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector multipliers;
  double objective = 0.0;
  std::vector<Index> basis;
  int pivots = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct SimplexOptions {
  double feas_tol = kDefaultFeasTol;
  double pivot_tol = kDefaultPivotTol;
  // Consecutive degenerate pivots tolerated under Dantzig pricing before
  // switching to Bland's rule.
  int degenerate_limit = 25;
  int max_pivots = 100000;
};

/// Two-phase primal simplex on a dense tableau. Dantzig pricing with lowest
/// column index on ties; Bland's rule after a run of degenerate pivots.
/// Throws DimensionError on inconsistent shapes and NumericError when the
/// tableau loses finiteness or the pivot budget is exhausted.
LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options);
LpSolution simplex_solve(const LpProblem& problem, double feas_tol = kDefaultFeasTol);

/// True iff some lambda >= 0 satisfies eq_matrix * lambda = eq_rhs, judged by
/// the phase-1 residual (L1) against feas_tol.
bool lp_feasible(const Matrix& eq_matrix, const Vector& eq_rhs, double feas_tol = kDefaultFeasTol);

}  // namespace datapolicy
