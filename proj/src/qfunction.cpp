#include "datapolicy/qfunction.hpp"

#include <algorithm>
#include <numeric>

namespace datapolicy {

Vector QueryResult::combine(const Matrix& per_column) const {
  Vector out = Vector::Zero(per_column.rows());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double w = multipliers(static_cast<Index>(c));
    if (w != 0.0) out += w * per_column.col(columns[c]);
  }
  return out;
}

std::size_t LocalSelection::total() const {
  std::size_t n = 0;
  for (const auto& k : indices) n += k.size();
  return n;
}

LpProblem interpolation_problem(const SafeSetStore& store, const Vector& x,
                                const std::vector<Index>& columns) {
  require_size(x.size(), store.state_dim(), "q-function query");
  require_finite(x, "q-function query");
  const Index n = store.state_dim();
  const Index m = static_cast<Index>(columns.size());
  LpProblem lp;
  lp.cost.resize(m);
  lp.eq_matrix.resize(n + 1, m);
  for (Index c = 0; c < m; ++c) {
    const Index col = columns[static_cast<std::size_t>(c)];
    lp.cost(c) = store.cost_vector()(col);
    lp.eq_matrix(0, c) = 1.0;
    lp.eq_matrix.block(1, c, n, 1) = store.point_matrix().col(col);
  }
  lp.eq_rhs.resize(n + 1);
  lp.eq_rhs(0) = 1.0;
  lp.eq_rhs.tail(n) = x;
  return lp;
}

namespace {

QueryResult solve_on_columns(const SafeSetStore& store, const Vector& x, std::vector<Index> columns,
                             double feas_tol) {
  QueryResult q;
  q.query = x;
  const LpSolution sol = simplex_solve(interpolation_problem(store, x, columns), feas_tol);
  if (sol.status == LpStatus::Unbounded) {
    // Impossible for a bounded simplex of multipliers; treat as solver breakdown.
    throw NumericError("q-function: interpolation LP reported unbounded");
  }
  q.columns = std::move(columns);
  if (!sol.optimal()) return q;
  q.feasible = true;
  q.value = sol.objective;
  q.multipliers = sol.multipliers;
  for (std::size_t c = 0; c < q.columns.size(); ++c) {
    if (q.multipliers(static_cast<Index>(c)) > feas_tol) {
      q.support.push_back(store.index_map()[static_cast<std::size_t>(q.columns[c])]);
    }
  }
  return q;
}

std::vector<Index> all_columns(const SafeSetStore& store) {
  std::vector<Index> cols(static_cast<std::size_t>(store.column_count()));
  std::iota(cols.begin(), cols.end(), Index{0});
  return cols;
}

}  // namespace

QueryResult eval_q_global(const SafeSetStore& store, const Vector& x, double feas_tol) {
  return solve_on_columns(store, x, all_columns(store), feas_tol);
}

LocalSelection knn_select(const SafeSetStore& store, const Vector& x, std::size_t n_neighbors) {
  if (n_neighbors < 1) throw Error("knn_select: n_neighbors must be at least 1");
  require_size(x.size(), store.state_dim(), "knn_select query");
  LocalSelection sel;
  sel.neighbor_count = n_neighbors;
  sel.indices.resize(store.trajectories().size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t j = 0; j < store.trajectories().size(); ++j) {
    const std::size_t len = store.trajectories()[j].size();
    const std::size_t offset = store.trajectory_offset(j);
    dist.clear();
    for (std::size_t k = 0; k < len; ++k) {
      dist.emplace_back((store.point_matrix().col(static_cast<Index>(offset + k)) - x).squaredNorm(), k);
    }
    const std::size_t take = std::min(n_neighbors, len);
    // Lexicographic (distance, time) order puts the lower time index first on ties.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    auto& out = sel.indices[j];
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
    std::sort(out.begin(), out.end());
  }
  return sel;
}

QueryResult eval_q_local(const SafeSetStore& store, const Vector& x, std::size_t n_neighbors,
                         double feas_tol) {
  const LocalSelection sel = knn_select(store, x, n_neighbors);
  std::vector<Index> columns;
  columns.reserve(sel.total());
  for (std::size_t j = 0; j < sel.indices.size(); ++j) {
    for (std::size_t k : sel.indices[j]) columns.push_back(static_cast<Index>(store.trajectory_offset(j) + k));
  }
  return solve_on_columns(store, x, std::move(columns), feas_tol);
}

bool contains(const SafeSetStore& store, const Vector& x, double feas_tol) {
  const LpProblem lp = interpolation_problem(store, x, all_columns(store));
  return lp_feasible(lp.eq_matrix, lp.eq_rhs, feas_tol);
}

}  // namespace datapolicy
