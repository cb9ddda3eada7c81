#include "datapolicy/clqr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace datapolicy {

namespace {

// Forward simulation and adjoint gradient of the condensed cost.
class Condensed {
 public:
  Condensed(const LtiSystem& system, const QuadStageCost& cost, const Vector& x0, int horizon)
      : sys_(system), cost_(cost), x0_(x0), horizon_(horizon), n_(system.state_dim()), d_(system.input_dim()) {}

  Index size() const { return horizon_ * d_; }

  std::vector<Vector> simulate(const Vector& u) const {
    std::vector<Vector> x(static_cast<std::size_t>(horizon_) + 1);
    x[0] = x0_;
    for (int k = 0; k < horizon_; ++k) {
      x[static_cast<std::size_t>(k) + 1] = sys_.a_matrix * x[static_cast<std::size_t>(k)] + sys_.b_matrix * u.segment(k * d_, d_);
    }
    return x;
  }

  double value(const Vector& u) const {
    const auto x = simulate(u);
    double v = 0.0;
    for (const auto& xk : x) v += xk.dot(cost_.state_weight * xk);
    for (int k = 0; k < horizon_; ++k) {
      const auto uk = u.segment(k * d_, d_);
      v += uk.dot(cost_.input_weight * uk);
    }
    return v;
  }

  Vector gradient(const Vector& u) const {
    const auto x = simulate(u);
    Vector g(size());
    Vector p = cost_.state_weight * x.back();
    for (int k = horizon_ - 1; k >= 0; --k) {
      g.segment(k * d_, d_) = 2.0 * (cost_.input_weight * u.segment(k * d_, d_) + sys_.b_matrix.transpose() * p);
      p = cost_.state_weight * x[static_cast<std::size_t>(k)] + sys_.a_matrix.transpose() * p;
    }
    return g;
  }

  // Dense Hessian 2 (Su' Qbar Su + Rbar).
  Matrix hessian() const {
    const Index m = size();
    Matrix su = Matrix::Zero((horizon_ + 1) * n_, m);
    for (int i = 0; i < horizon_; ++i) {
      Matrix block = sys_.b_matrix;
      for (int k = i + 1; k <= horizon_; ++k) {
        su.block(k * n_, i * d_, n_, d_) = block;
        block = sys_.a_matrix * block;
      }
    }
    Matrix h = Matrix::Zero(m, m);
    for (int k = 0; k <= horizon_; ++k) {
      const auto rows = su.middleRows(k * n_, n_);
      h.noalias() += rows.transpose() * cost_.state_weight * rows;
    }
    for (int k = 0; k < horizon_; ++k) h.block(k * d_, k * d_, d_, d_) += cost_.input_weight;
    return 2.0 * h;
  }

  Vector lower() const { return sys_.input_lower.replicate(horizon_, 1); }
  Vector upper() const { return sys_.input_upper.replicate(horizon_, 1); }

 private:
  const LtiSystem& sys_;
  const QuadStageCost& cost_;
  const Vector& x0_;
  int horizon_;
  Index n_;
  Index d_;
};

Vector project(const Vector& u, const Vector& lo, const Vector& hi) { return u.cwiseMax(lo).cwiseMin(hi); }

double projected_gradient_norm(const Vector& u, const Vector& g, const Vector& lo, const Vector& hi) {
  if (u.size() == 0) return 0.0;
  return (u - project(u - g, lo, hi)).lpNorm<Eigen::Infinity>();
}

// Fixes the variables that sit on a bound with the gradient pushing outward,
// solves the free block exactly, refines the solve against the adjoint
// gradient, and projects.
Vector polish(const Condensed& qp, const Matrix& hessian, const Vector& u, const Vector& lo,
              const Vector& hi) {
  const Vector g = qp.gradient(u);
  const double bound_tol = 1e-9;
  std::vector<Index> free;
  Vector fixed = u;
  for (Index i = 0; i < u.size(); ++i) {
    const bool at_lo = u(i) <= lo(i) + bound_tol && g(i) > 0.0;
    const bool at_hi = u(i) >= hi(i) - bound_tol && g(i) < 0.0;
    if (at_lo) {
      fixed(i) = lo(i);
    } else if (at_hi) {
      fixed(i) = hi(i);
    } else {
      free.push_back(i);
    }
  }
  if (free.empty()) return fixed;
  const Index nf = static_cast<Index>(free.size());
  Matrix hff(nf, nf);
  for (Index a = 0; a < nf; ++a) {
    for (Index b = 0; b < nf; ++b) hff(a, b) = hessian(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
  }
  const Eigen::LDLT<Matrix> ldlt(hff);
  Vector out = fixed;
  for (int round = 0; round < 4; ++round) {
    const Vector grad = qp.gradient(out);
    Vector rhs(nf);
    for (Index a = 0; a < nf; ++a) rhs(a) = grad(free[static_cast<std::size_t>(a)]);
    const Vector delta = ldlt.solve(rhs);
    if (!delta.allFinite()) return u;
    for (Index a = 0; a < nf; ++a) out(free[static_cast<std::size_t>(a)]) -= delta(a);
    if (delta.lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  return project(out, lo, hi);
}

}  // namespace

ClqrQpResult solve_condensed_qp(const LtiSystem& system, const QuadStageCost& cost, const Vector& x0,
                                int horizon, const ClqrConfig& config) {
  if (horizon < 1) throw Error("clqr: horizon must be at least 1");
  const Condensed qp(system, cost, x0, horizon);
  const Vector lo = qp.lower();
  const Vector hi = qp.upper();
  const Matrix hessian = qp.hessian();
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Matrix>(hessian, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step_size = 1.0 / lipschitz;

  ClqrQpResult result;
  result.horizon = horizon;
  Vector u = Vector::Zero(qp.size());
  Vector y = u;
  double momentum = 1.0;
  constexpr int kPolishEvery = 50;

  for (int it = 1; it <= config.qp_max_iters; ++it) {
    const Vector u_next = project(y - step_size * qp.gradient(y), lo, hi);
    // Gradient-based adaptive restart.
    if ((y - u_next).dot(u_next - u) > 0.0) {
      momentum = 1.0;
      y = u_next;
    } else {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = u_next + ((momentum - 1.0) / next_momentum) * (u_next - u);
      momentum = next_momentum;
    }
    u = u_next;

    const bool check = it % kPolishEvery == 0 || it == config.qp_max_iters;
    if (!check) continue;
    double pg = projected_gradient_norm(u, qp.gradient(u), lo, hi);
    if (pg > config.qp_tol) {
      const Vector candidate = polish(qp, hessian, u, lo, hi);
      const double candidate_pg = projected_gradient_norm(candidate, qp.gradient(candidate), lo, hi);
      if (candidate_pg <= config.qp_tol) {
        u = candidate;
        pg = candidate_pg;
      }
    }
    if (!u.allFinite()) throw NumericError("clqr: non-finite iterate");
    if (pg <= config.qp_tol) {
      result.inputs = u;
      result.projected_gradient_norm = pg;
      result.iterations = it;
      return result;
    }
  }
  throw QpStalled("clqr: projected gradient did not reach " + std::to_string(config.qp_tol) +
                  " within " + std::to_string(config.qp_max_iters) + " iterations (horizon " +
                  std::to_string(horizon) + ")");
}

Trajectory solve_clqr(const LtiSystem& system, const QuadStageCost& cost, const Vector& x0,
                      const ClqrConfig& config) {
  system.check();
  cost.check(system.state_dim(), system.input_dim());
  require_size(x0.size(), system.state_dim(), "clqr: x0");
  require_finite(x0, "clqr: x0");
  if (!(config.epsilon > 0.0)) throw Error("clqr: epsilon must be positive");
  if (config.max_horizon < 1 || config.initial_horizon < 1) throw Error("clqr: horizons must be positive");
  if (!system.state_in_box(x0, 0.0)) throw Error("clqr: x0 lies outside the state box");

  const Index d = system.input_dim();
  const StageCost stage(cost);
  if (x0.squaredNorm() <= config.epsilon) {
    return make_trajectory({x0}, {Vector::Zero(d)}, stage);
  }

  int horizon = std::min(config.initial_horizon, config.max_horizon);
  while (true) {
    const ClqrQpResult qp = solve_condensed_qp(system, cost, x0, horizon, config);
    std::vector<Vector> states{x0};
    for (int k = 0; k < horizon; ++k) {
      states.push_back(step(system, states.back(), qp.inputs.segment(k * d, d)));
    }
    if (states.back().squaredNorm() <= config.epsilon) {
      std::size_t terminal = 0;
      while (states[terminal].squaredNorm() > config.epsilon) ++terminal;
      states.resize(terminal + 1);
      const Vector margin = Vector::Constant(system.state_dim(), config.qp_tol);
      std::vector<Vector> inputs;
      for (std::size_t k = 0; k < terminal; ++k) inputs.push_back(qp.inputs.segment(static_cast<Index>(k) * d, d));
      inputs.push_back(Vector::Zero(d));
      for (std::size_t k = 0; k <= terminal; ++k) {
        const Vector& x = states[k];
        if (((x - system.state_lower).array() <= margin.array()).any() ||
            ((system.state_upper - x).array() <= margin.array()).any()) {
          throw StateConstraintActive("clqr: state box active at k=" + std::to_string(k) +
                                      "; the input-only QP is not the constrained optimum");
        }
      }
      Trajectory t = make_trajectory(std::move(states), std::move(inputs), stage);
      return config.exact_terminal ? append_origin_tail(t, system, stage) : t;
    }
    if (horizon >= config.max_horizon) {
      throw NoConvergence("clqr: ||x_H||^2 > epsilon at the maximum horizon " +
                          std::to_string(config.max_horizon));
    }
    horizon = std::min(2 * horizon, config.max_horizon);
  }
}

Trajectory append_origin_tail(const Trajectory& trajectory, const LtiSystem& system,
                              const StageCost& cost, double tol) {
  if (trajectory.states.empty()) throw Error("origin tail: empty trajectory");
  system.check();
  const Index n = system.state_dim();
  const Index d = system.input_dim();
  const Vector& x_end = trajectory.states.back();
  require_size(x_end.size(), n, "origin tail: state");
  if ((x_end.array() == 0.0).all()) return trajectory;

  Matrix reach(n, n * d);
  Matrix power = Matrix::Identity(n, n);
  for (Index k = n - 1; k >= 0; --k) {
    reach.middleCols(k * d, d) = power * system.b_matrix;
    power = system.a_matrix * power;
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(reach * reach.transpose());
  if (qr.rank() < n) throw NumericError("origin tail: (A, B) is not controllable in n steps");
  const Vector u = reach.transpose() * qr.solve(-power * x_end);

  std::vector<Vector> states(trajectory.states.begin(), trajectory.states.end());
  std::vector<Vector> inputs(trajectory.inputs.begin(), trajectory.inputs.end() - 1);
  for (Index k = 0; k < n; ++k) {
    inputs.push_back(u.segment(k * d, d));
    states.push_back(step(system, states.back(), inputs.back()));
  }
  if (states.back().lpNorm<Eigen::Infinity>() > tol) throw NumericError("origin tail: steering residual too large");
  states.back().setZero();
  inputs.push_back(Vector::Zero(d));
  for (std::size_t k = trajectory.states.size(); k < states.size(); ++k) {
    if (!system.state_in_box(states[k], 0.0) || !system.input_in_box(inputs[k - 1], 0.0)) {
      throw Error("origin tail: steering leaves the constraint boxes");
    }
  }
  return make_trajectory(std::move(states), std::move(inputs), cost);
}

Matrix riccati_lqr(const LtiSystem& system, const QuadStageCost& cost, double tol, int max_iters) {
  system.check();
  cost.check(system.state_dim(), system.input_dim());
  const Matrix& a = system.a_matrix;
  const Matrix& b = system.b_matrix;
  Matrix p = cost.state_weight;
  for (int it = 0; it < max_iters; ++it) {
    const Matrix bp = b.transpose() * p;
    const Matrix gain = (cost.input_weight + bp * b).ldlt().solve(bp * a);
    Matrix next = cost.state_weight + a.transpose() * p * a - a.transpose() * p * b * gain;
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e15) {
      throw NoConvergence("riccati: iteration diverged");
    }
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (change <= tol * std::max(1.0, p.cwiseAbs().maxCoeff())) {
      const Matrix bpn = b.transpose() * p;
      return (cost.input_weight + bpn * b).ldlt().solve(bpn * a);
    }
  }
  throw NoConvergence("riccati: no fixed point within " + std::to_string(max_iters) + " iterations");
}

}  // namespace datapolicy
