#pragma once

#include <cstddef>
#include <vector>

#include "datapolicy/linalg.hpp"
#include "datapolicy/lp.hpp"
#include "datapolicy/safe_set.hpp"

namespace datapolicy {

/// Q (or Q_L) at one state. multipliers are aligned with columns, which are
/// store column indices; support lists the entries above feas_tol.
struct QueryResult {
  bool feasible = false;
  double value = 0.0;
  Vector query;
  std::vector<Index> columns;
  Vector multipliers;
  std::vector<PointIndex> support;

  /// Multiplier-weighted sum of the given per-column data (e.g. stored
  /// inputs): sum_c lambda_c * data.col(columns[c]).
  Vector combine(const Matrix& per_column) const;
};

/// K^j(x) for every trajectory j: the min(N, T_j+1) time indices closest to
/// x, listed in ascending time order.
struct LocalSelection {
  std::vector<std::vector<std::size_t>> indices;
  std::size_t neighbor_count = 0;

  std::size_t total() const;
};

/// The interpolation LP over a subset of store columns: rows are
/// sum lambda = 1 followed by sum lambda x_k^j = x.
LpProblem interpolation_problem(const SafeSetStore& store, const Vector& x,
                                const std::vector<Index>& columns);

/// Global Q-function: LP over every stored point. feasible == false when x is
/// outside the convex safe set. Throws NumericError on solver failure.
QueryResult eval_q_global(const SafeSetStore& store, const Vector& x,
                          double feas_tol = kDefaultFeasTol);

/// Brute-force scan; ties at equal distance go to the lower time index.
LocalSelection knn_select(const SafeSetStore& store, const Vector& x, std::size_t n_neighbors);

/// Local Q-function: LP restricted to the knn_select columns.
QueryResult eval_q_local(const SafeSetStore& store, const Vector& x, std::size_t n_neighbors,
                         double feas_tol = kDefaultFeasTol);

/// Membership in the convex hull of all stored states.
bool contains(const SafeSetStore& store, const Vector& x, double feas_tol = kDefaultFeasTol);

}  // namespace datapolicy
