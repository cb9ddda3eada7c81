#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "datapolicy/clqr.hpp"
#include "datapolicy/policy.hpp"
#include "datapolicy/safe_set.hpp"

namespace datapolicy::cli {

struct RunRow {
  Vector x0;
  SimulationReport report;
};

/// Closed loops from every x0 against one store; `threads` > 1 splits the
/// runs across threads. Order of the result matches `x0s`.
std::vector<RunRow> run_many(const SafeSetStore& store, const std::vector<Vector>& x0s,
                             const PolicyConfig& config, std::size_t max_steps, unsigned threads);

/// Names of every failed invariant across the rows, one line each.
std::vector<std::string> collect_failures(const std::vector<RunRow>& rows, double cost_bound_tol);

struct Table1 {
  std::vector<RunRow> rows;
  std::vector<std::string> failures;
};

Table1 run_table1(const SafeSetStore& seed, const PolicyConfig& config, unsigned threads);
void write_table1_csv(const Table1& table, const std::filesystem::path& path);

struct Table2Row {
  Vector x0;
  double j_seed = 0.0;
  double j1 = 0.0;
  double q1 = 0.0;
  double j2 = 0.0;
  double q2 = 0.0;
  bool q1_equals_j = false;
  bool j2_le_j1 = false;
};

struct Table2 {
  std::vector<Table2Row> rows;
  std::vector<RunRow> runs1;
  std::vector<RunRow> runs2;
  std::optional<SafeSetStore> store1;
  std::optional<SafeSetStore> store2;
  std::vector<std::string> failures;
};

struct Table2Options {
  bool exact_terminal = true;
  double input_weight = 0.01;
  /// Absolute slack for Q1(x0) == J(x0) and J2 <= J1.
  double equality_tol = 1e-6;
};

/// Q1: seed plus the closed loops from the ten non-seed benchmark states.
/// Q2: seed plus the optimal trajectory from (2.9033, 1.2959) (or `second`).
Table2 run_table2(const SafeSetStore& seed, const std::optional<SafeSetStore>& second,
                  const PolicyConfig& config, const Table2Options& options, unsigned threads);
void write_table2_csv(const Table2& table, const std::filesystem::path& path);

/// Eight slow-feedback rollouts of the double integrator (each ending at the
/// exact origin), duplicated `replicate` times.
SafeSetStore make_bench_store(std::size_t replicate = 1);

struct BenchRow {
  std::string mode;
  std::size_t count = 0;
  std::size_t decision_variables = 0;
  double median_us = 0.0;
  double p95_us = 0.0;
};

struct BenchOptions {
  std::size_t n_neighbors = 10;
  std::size_t repeats = 5;
  std::size_t max_states = 400;
  std::uint64_t seed = 1;
  double feas_tol = kDefaultFeasTol;
};

/// Times eval_q_global and eval_q_local (plus input extraction) over the same
/// closed-loop state sequence. Each state's time is the minimum over
/// `repeats` evaluations.
std::vector<BenchRow> run_bench(const SafeSetStore& store, const BenchOptions& options);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

/// Seeded random points of the convex safe set: Dirichlet weights over
/// `support` randomly chosen stored points.
std::vector<Vector> sample_in_safe_set(const SafeSetStore& store, std::size_t count, std::uint64_t seed,
                                       std::size_t support = 3);

/// Static plot of closed-loop paths over the stored states in the (x1, x2)
/// plane, with the state box.
void write_phase_plot(const SafeSetStore& store, const std::vector<RunRow>& rows,
                      const std::filesystem::path& path, const std::string& title);

std::string format_number(double v);

}  // namespace datapolicy::cli
