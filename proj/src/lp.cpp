#include "datapolicy/lp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace datapolicy {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_dimensions(const Matrix& eq_matrix, const Vector& eq_rhs, const Vector* cost) {
  if (eq_matrix.cols() < 1) throw DimensionError("lp: at least one variable is required");
  if (eq_matrix.rows() != eq_rhs.size()) {
    throw DimensionError("lp: eq_matrix has " + std::to_string(eq_matrix.rows()) +
                         " rows but eq_rhs has " + std::to_string(eq_rhs.size()) + " entries");
  }
  if (cost != nullptr && cost->size() != eq_matrix.cols()) {
    throw DimensionError("lp: cost has " + std::to_string(cost->size()) +
                         " entries but eq_matrix has " + std::to_string(eq_matrix.cols()) +
                         " columns");
  }
  require_finite(eq_matrix, "lp eq_matrix");
  require_finite(eq_rhs, "lp eq_rhs");
  if (cost != nullptr) require_finite(*cost, "lp cost");
}

enum class Phase { One, Two };
enum class IterateResult { Optimal, Unbounded };

// Dense tableau with one artificial column per row. The last row holds the
// reduced costs, the last column the basic values; the bottom-right entry is
// minus the current objective.
class Tableau {
 public:
  Tableau(const Matrix& eq_matrix, const Vector& eq_rhs, const SimplexOptions& options)
      : rows_(eq_matrix.rows()),
        vars_(eq_matrix.cols()),
        options_(options),
        t_(RowMajor::Zero(rows_ + 1, vars_ + rows_ + 1)),
        basis_(static_cast<std::size_t>(rows_)) {
    for (Index i = 0; i < rows_; ++i) {
      const double sign = eq_rhs(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(vars_) = sign * eq_matrix.row(i);
      t_(i, vars_ + i) = 1.0;
      t_(i, rhs_col()) = sign * eq_rhs(i);
      basis_[static_cast<std::size_t>(i)] = vars_ + i;
    }
  }

  Index rows() const { return rows_; }
  Index vars() const { return vars_; }
  Index rhs_col() const { return vars_ + rows_; }
  int pivots() const { return pivots_; }
  const std::vector<Index>& basis() const { return basis_; }
  bool is_artificial(Index col) const { return col >= vars_; }
  double rhs(Index row) const { return t_(row, rhs_col()); }
  double objective() const { return -t_(rows_, rhs_col()); }

  void price_phase_one() {
    t_.row(rows_).setZero();
    for (Index i = 0; i < rows_; ++i) t_.row(rows_) -= t_.row(i);
    for (Index i = 0; i < rows_; ++i) t_(rows_, vars_ + i) = 0.0;
  }

  void price_phase_two(const Vector& cost) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(vars_) = cost.transpose();
    for (Index i = 0; i < rows_; ++i) {
      const Index b = basis_[static_cast<std::size_t>(i)];
      if (!is_artificial(b)) t_.row(rows_) -= cost(b) * t_.row(i);
    }
  }

  IterateResult iterate(Phase phase) {
    const Index last_entering = phase == Phase::One ? vars_ + rows_ : vars_;
    int degenerate_run = 0;
    while (true) {
      const bool bland = degenerate_run >= options_.degenerate_limit;
      const Index entering = choose_entering(last_entering, bland);
      if (entering < 0) return IterateResult::Optimal;
      const Index leaving = choose_leaving(entering);
      if (leaving < 0) return IterateResult::Unbounded;
      const double step = rhs(leaving) / t_(leaving, entering);
      degenerate_run = step <= options_.pivot_tol ? degenerate_run + 1 : 0;
      pivot(leaving, entering);
    }
  }

  // After phase 1, replaces basic artificials by original columns where the
  // row allows it; rows with no usable entry are redundant and are zeroed.
  void drive_out_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Index best = -1;
      double best_abs = options_.pivot_tol;
      for (Index j = 0; j < vars_; ++j) {
        const double a = std::abs(t_(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best >= 0) {
        pivot(i, best);
      } else {
        t_.row(i).head(vars_).setZero();
      }
    }
  }

 private:
  Index choose_entering(Index last, bool bland) const {
    const double threshold = -options_.pivot_tol;
    Index best = -1;
    double best_value = threshold;
    for (Index j = 0; j < last; ++j) {
      const double d = t_(rows_, j);
      if (bland) {
        if (d < threshold) return j;
      } else if (d < best_value) {
        best_value = d;
        best = j;
      }
    }
    return best;
  }

  Index choose_leaving(Index entering) const {
    Index best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < rows_; ++i) {
      const double a = t_(i, entering);
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(rhs(i), 0.0) / a;
      const double tie = 1e-14 * (1.0 + std::abs(best_ratio));
      if (best < 0 || ratio < best_ratio - tie) {
        best = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + tie &&
                 basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(best)]) {
        best = i;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    return best;
  }

  void pivot(Index row, Index col) {
    const double p = t_(row, col);
    t_.row(row) /= p;
    t_(row, col) = 1.0;
    for (Index i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f == 0.0) continue;
      t_.row(i) -= f * t_.row(row);
      t_(i, col) = 0.0;
    }
    for (Index i = 0; i < rows_; ++i) {
      double& v = t_(i, rhs_col());
      if (v < 0.0 && v > -options_.feas_tol) v = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = col;
    if (!t_.row(row).allFinite() || !t_.row(rows_).allFinite()) {
      throw NumericError("simplex: non-finite tableau entry after pivot");
    }
    if (++pivots_ > options_.max_pivots) {
      throw NumericError("simplex: pivot budget exhausted (" + std::to_string(options_.max_pivots) +
                         ")");
    }
  }

  Index rows_;
  Index vars_;
  SimplexOptions options_;
  RowMajor t_;
  std::vector<Index> basis_;
  int pivots_ = 0;
};

void check_options(const SimplexOptions& options) {
  if (!(options.feas_tol > 0.0)) throw Error("simplex: feas_tol must be positive");
  if (!(options.pivot_tol > 0.0)) throw Error("simplex: pivot_tol must be positive");
}

// Recomputes the basic values from the original data.
Vector refine_basic_solution(const Matrix& eq_matrix, const Vector& eq_rhs,
                             const std::vector<Index>& basis_cols, const Vector& tableau_solution) {
  if (basis_cols.empty()) return tableau_solution;
  Matrix basic(eq_matrix.rows(), static_cast<Index>(basis_cols.size()));
  for (std::size_t c = 0; c < basis_cols.size(); ++c) {
    basic.col(static_cast<Index>(c)) = eq_matrix.col(basis_cols[c]);
  }
  const Vector values = basic.colPivHouseholderQr().solve(eq_rhs);
  if (!values.allFinite()) return tableau_solution;
  Vector refined = Vector::Zero(eq_matrix.cols());
  for (std::size_t c = 0; c < basis_cols.size(); ++c) {
    refined(basis_cols[c]) = values(static_cast<Index>(c));
  }
  const double old_residual = (eq_matrix * tableau_solution - eq_rhs).lpNorm<Eigen::Infinity>();
  const double new_residual = (eq_matrix * refined - eq_rhs).lpNorm<Eigen::Infinity>();
  return new_residual <= old_residual ? refined : tableau_solution;
}

}  // namespace

LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options) {
  check_options(options);
  check_dimensions(problem.eq_matrix, problem.eq_rhs, &problem.cost);

  Tableau tableau(problem.eq_matrix, problem.eq_rhs, options);
  tableau.price_phase_one();
  tableau.iterate(Phase::One);

  LpSolution solution;
  if (tableau.objective() > options.feas_tol) {
    solution.status = LpStatus::Infeasible;
    solution.pivots = tableau.pivots();
    return solution;
  }

  tableau.drive_out_artificials();
  tableau.price_phase_two(problem.cost);
  if (tableau.iterate(Phase::Two) == IterateResult::Unbounded) {
    solution.status = LpStatus::Unbounded;
    solution.pivots = tableau.pivots();
    return solution;
  }

  Vector lambda = Vector::Zero(tableau.vars());
  std::vector<Index> basis_cols;
  for (Index i = 0; i < tableau.rows(); ++i) {
    const Index b = tableau.basis()[static_cast<std::size_t>(i)];
    if (tableau.is_artificial(b)) continue;
    lambda(b) = tableau.rhs(i);
    basis_cols.push_back(b);
  }
  lambda = refine_basic_solution(problem.eq_matrix, problem.eq_rhs, basis_cols, lambda);

  solution.status = LpStatus::Optimal;
  solution.multipliers = std::move(lambda);
  solution.objective = problem.cost.dot(solution.multipliers);
  solution.basis = std::move(basis_cols);
  solution.pivots = tableau.pivots();
  if (!std::isfinite(solution.objective)) throw NumericError("simplex: non-finite objective");
  return solution;
}

LpSolution simplex_solve(const LpProblem& problem, double feas_tol) {
  SimplexOptions options;
  options.feas_tol = feas_tol;
  return simplex_solve(problem, options);
}

bool lp_feasible(const Matrix& eq_matrix, const Vector& eq_rhs, double feas_tol) {
  SimplexOptions options;
  options.feas_tol = feas_tol;
  check_options(options);
  check_dimensions(eq_matrix, eq_rhs, nullptr);
  Tableau tableau(eq_matrix, eq_rhs, options);
  tableau.price_phase_one();
  tableau.iterate(Phase::One);
  return tableau.objective() <= feas_tol;
}

}  // namespace datapolicy
