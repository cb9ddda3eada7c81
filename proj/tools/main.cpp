#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "datapolicy/dataset_io.hpp"
#include "datapolicy/report_io.hpp"
#include "datapolicy/study.hpp"
#include "datapolicy/terminal_demo.hpp"

using namespace datapolicy;
using datapolicy::cli::format_number;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

struct Globals {
  std::string dataset;
  std::string out;
  double tol = kDefaultFeasTol;
  std::uint64_t seed = 1;
  unsigned parallel = 1;
};

Vector parse_state(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("x0", "cannot parse state \"" + text + "\" (expected comma-separated numbers)");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  Vector x(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Index>(i)) = values[i];
  return x;
}

std::string state_text(const Vector& x) {
  std::string s;
  char buf[32];
  for (Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", x(i));
    s += (i ? "," : "") + std::string(buf);
  }
  return s;
}

std::string full_state_text(const Vector& x) {
  std::string s;
  for (Index i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_number(x(i));
  return s;
}

SafeSetStore require_dataset(const Globals& g) {
  if (g.dataset.empty()) throw Error("--dataset is required for this command");
  return load_dataset(g.dataset);
}

std::filesystem::path out_dir(const Globals& g) { return g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out); }

void report_failures(const std::vector<std::string>& failures) {
  for (const auto& f : failures) std::cerr << "FAILED: " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-based policies from stored safe trajectories of a constrained linear system"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(false);
  app.set_config("--config", "", "TOML config file with the same keys as the command-line options");

  Globals g;
  app.add_option("--dataset", g.dataset, "Dataset file (ss-v1)");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--tol", g.tol, "LP feasibility tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for random initial states");
  app.add_option("--parallel", g.parallel, "Threads for independent closed-loop runs")->check(CLI::PositiveNumber);

  // seed
  auto* seed_cmd = app.add_subcommand("seed", "Write the single-CLQR-trajectory dataset");
  std::string seed_x0 = "-1,3";
  double input_weight = kStudyInputWeight;
  bool no_exact = false;
  int max_horizon = 400;
  seed_cmd->add_option("--x0", seed_x0, "Initial state, comma separated");
  seed_cmd->add_option("--input-weight", input_weight, "Input weight r of the cost x'x + r u'u")
      ->check(CLI::PositiveNumber);
  seed_cmd->add_flag("--no-exact-terminal", no_exact, "Keep the epsilon-truncated terminal state");
  seed_cmd->add_option("--max-horizon", max_horizon, "Largest QP horizon")->check(CLI::PositiveNumber);

  // build
  auto* build_cmd = app.add_subcommand("build", "Build a dataset");
  std::vector<std::string> merge;
  std::vector<std::string> loop_x0;
  bool terminal_demo = false;
  bool indicator = false;
  bool bench_store = false;
  std::size_t replicate = 1;
  auto* merge_opt = build_cmd->add_option("--merge", merge, "Datasets to concatenate (same system and cost)");
  auto* loop_opt =
      build_cmd->add_option("--closed-loop", loop_x0, "Append closed-loop runs of --dataset from these x0");
  auto* demo_opt = build_cmd->add_flag("--terminal-demo", terminal_demo, "Terminal-set demo dataset");
  build_cmd->add_flag("--indicator", indicator, "Use the uncertified 0/1 indicator cost in the demo")
      ->needs(demo_opt);
  auto* bench_opt = build_cmd->add_flag("--bench", bench_store, "Long-rollout benchmark dataset");
  build_cmd->add_option("--replicate", replicate, "Copies of every benchmark trajectory")->check(CLI::PositiveNumber);
  build_cmd->add_flag("--no-exact-terminal", no_exact, "Do not close appended runs at the exact origin");
  merge_opt->excludes(loop_opt)->excludes(demo_opt)->excludes(bench_opt);
  loop_opt->excludes(demo_opt)->excludes(bench_opt);
  demo_opt->excludes(bench_opt);

  // table1 / table2
  auto* t1_cmd = app.add_subcommand("table1", "Realized cost and Q-value from the eleven benchmark states");
  bool plot = true;
  t1_cmd->add_flag("!--no-plot", plot, "Skip the SVG plot");
  auto* t2_cmd = app.add_subcommand("table2", "Effect of data: Q1 (closed-loop data) and Q2 (second optimum)");
  std::string second;
  t2_cmd->add_option("--second", second, "Dataset holding the second trajectory (default: solve it)");
  t2_cmd->add_flag("--no-exact-terminal", no_exact, "Keep epsilon-truncated terminal states");
  t2_cmd->add_flag("!--no-plot", plot, "Skip the SVG plots");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Closed loop from one or more initial states");
  std::vector<std::string> sim_x0;
  std::size_t random_count = 0;
  std::string mode = "global";
  std::size_t neighbors = 10;
  bool no_fallback = false;
  std::size_t max_steps = kDefaultMaxSteps;
  double lyapunov_tol = 1e-7;
  double cost_bound_tol = 1e-6;
  bool no_shift = false;
  sim_cmd->add_option("--x0", sim_x0, "Initial state, comma separated (repeatable)");
  sim_cmd->add_option("--random", random_count, "Also run this many seeded points of the convex safe set");
  sim_cmd->add_option("--mode", mode, "Policy mode")->check(CLI::IsMember({"global", "local"}));
  sim_cmd->add_option("--neighbors", neighbors, "N nearest points per trajectory (local)")->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--no-fallback", no_fallback, "Local mode: fail instead of doubling N");
  sim_cmd->add_option("--max-steps", max_steps, "Step limit");
  sim_cmd->add_option("--lyapunov-tol", lyapunov_tol, "Slack of the decrease monitor")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--cost-bound-tol", cost_bound_tol, "Slack of J <= Q")->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--no-shift-check", no_shift, "Skip the candidate-shift monitor");
  sim_cmd->add_flag("!--no-plot", plot, "Skip the SVG plot");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Median per-step evaluation time, global vs local");
  cli::BenchOptions bench;
  bench_cmd->add_option("--replicate", replicate, "Copies of every stored trajectory")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--neighbors", bench.n_neighbors, "N for the local mode")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repeats", bench.repeats, "Timings per state (minimum kept)")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--states", bench.max_states, "Number of timed states")->check(CLI::PositiveNumber);

  // validate
  auto* val_cmd = app.add_subcommand("validate", "Check every stored trajectory against the assumptions");
  double validation_tol = kDefaultValidationTol;
  val_cmd->add_option("--validation-tol", validation_tol, "Dynamics and box tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  PolicyConfig policy;
  policy.feas_tol = g.tol;

  try {
    if (seed_cmd->parsed()) {
      ClqrConfig clqr;
      clqr.exact_terminal = !no_exact;
      clqr.max_horizon = max_horizon;
      const SafeSetStore store = seed_store(parse_state(seed_x0), input_weight, clqr);
      const std::filesystem::path path = g.out.empty() ? std::string("seed.json") : g.out;
      save_dataset(store, path);
      const Trajectory& t = store.trajectories().front();
      std::cout << "wrote " << path.string() << ": T = " << t.duration() << ", J(x0) = " << format_number(t.total_cost())
                << '\n';
      return 0;
    }

    if (build_cmd->parsed()) {
      if (g.out.empty()) throw Error("build: --out is required");
      std::optional<SafeSetStore> store;
      if (!merge.empty()) {
        store.emplace(load_dataset(merge.front()));
        for (std::size_t i = 1; i < merge.size(); ++i) {
          const SafeSetStore next = load_dataset(merge[i]);
          store.emplace(extend_safe_set(*store, next.trajectories()));
        }
      } else if (!loop_x0.empty()) {
        const SafeSetStore base = require_dataset(g);
        std::vector<Vector> x0s;
        for (const auto& s : loop_x0) x0s.push_back(parse_state(s));
        const auto rows = cli::run_many(base, x0s, policy, kDefaultMaxSteps, g.parallel);
        const auto failures = cli::collect_failures(rows, policy.cost_bound_tol);
        if (!failures.empty()) {
          report_failures(failures);
          return kExitFailed;
        }
        std::vector<Trajectory> extra;
        for (const auto& row : rows) {
          Trajectory t = report_to_trajectory(row.report, base);
          if (!no_exact && base.terminal_set() == nullptr) t = append_origin_tail(t, base.system(), base.stage_cost());
          extra.push_back(std::move(t));
        }
        store.emplace(extend_safe_set(base, std::move(extra)));
      } else if (terminal_demo) {
        store.emplace(make_terminal_demo(indicator));
      } else if (bench_store) {
        store.emplace(cli::make_bench_store(replicate));
      } else {
        throw Error("build: choose one of --merge, --closed-loop, --terminal-demo, --bench");
      }
      save_dataset(*store, g.out);
      std::cout << "wrote " << g.out << ": " << store->trajectories().size() << " trajectories, "
                << store->column_count() << " points" << (store->certified() ? "" : " (uncertified)") << '\n';
      return 0;
    }

    if (t1_cmd->parsed()) {
      const SafeSetStore seed = require_dataset(g);
      const cli::Table1 table = cli::run_table1(seed, policy, g.parallel);
      const auto dir = out_dir(g);
      cli::write_table1_csv(table, dir / "table1.csv");
      if (plot) cli::write_phase_plot(seed, table.rows, dir / "table1.svg", "Closed-loop trajectories (seed store)");
      std::printf("%-22s %12s %12s\n", "x0", "J(x0)", "Q(x0)");
      for (const auto& row : table.rows) {
        std::printf("%-22s %12.4f %12.4f\n", state_text(row.x0).c_str(), row.report.realized_cost,
                    row.report.initial_q);
      }
      report_failures(table.failures);
      return table.failures.empty() ? 0 : kExitFailed;
    }

    if (t2_cmd->parsed()) {
      const SafeSetStore seed = require_dataset(g);
      std::optional<SafeSetStore> second_store;
      if (!second.empty()) second_store.emplace(load_dataset(second));
      cli::Table2Options options;
      options.exact_terminal = !no_exact;
      const cli::Table2 table = cli::run_table2(seed, second_store, policy, options, g.parallel);
      if (!table.store1) {
        report_failures(table.failures);
        return kExitFailed;
      }
      const auto dir = out_dir(g);
      cli::write_table2_csv(table, dir / "table2.csv");
      save_dataset(*table.store1, dir / "q1.json");
      save_dataset(*table.store2, dir / "q2.json");
      nlohmann::json meta = {
          {"table", "table2.csv"},
          {"q1_store", "q1.json"},
          {"q2_store", "q2.json"},
          {"termination", "closed loops stop at the first t with ||x_t||^2 <= 1e-10"},
          {"q1_runs_exact_terminal", options.exact_terminal},
          {"q2_source", second.empty() ? std::string("clqr from (2.9033, 1.2959)") : second},
          {"feas_tol", g.tol},
          {"equality_tol", options.equality_tol},
          {"q1_points", table.store1->column_count()},
          {"q2_points", table.store2->column_count()}};
      write_json_file(meta, dir / "table2.json");
      if (plot) {
        cli::write_phase_plot(*table.store1, table.runs1, dir / "table2_q1.svg", "Closed loop on the Q1 store");
        cli::write_phase_plot(*table.store2, table.runs2, dir / "table2_q2.svg", "Closed loop on the Q2 store");
      }
      std::printf("%-22s %10s %10s %10s %10s\n", "x0", "J1", "Q1", "J2", "Q2");
      for (const auto& r : table.rows) {
        std::printf("%-22s %10.2f %10.2f %10.2f %10.2f\n", state_text(r.x0).c_str(), r.j1, r.q1, r.j2, r.q2);
      }
      report_failures(table.failures);
      return table.failures.empty() ? 0 : kExitFailed;
    }

    if (sim_cmd->parsed()) {
      const SafeSetStore store = require_dataset(g);
      std::vector<Vector> x0s;
      for (const auto& s : sim_x0) x0s.push_back(parse_state(s));
      const auto sampled = cli::sample_in_safe_set(store, random_count, g.seed);
      x0s.insert(x0s.end(), sampled.begin(), sampled.end());
      if (x0s.empty()) throw Error("simulate: give --x0 or --random");
      for (const auto& x : x0s) require_size(x.size(), store.state_dim(), "simulate: x0");
      if (mode == "local") {
        policy.mode = LocalMode{neighbors, no_fallback ? LocalFallback::None : LocalFallback::DoubleNeighbors};
      }
      policy.lyapunov_tol = lyapunov_tol;
      policy.cost_bound_tol = cost_bound_tol;
      policy.check_candidate_shift = !no_shift;
      const auto rows = cli::run_many(store, x0s, policy, max_steps, g.parallel);
      const auto dir = out_dir(g);
      std::filesystem::create_directories(dir);
      std::ofstream summary(dir / "summary.csv");
      summary << "run,x0,J,Q,terminated,monitors_passed,steps,fallbacks,warnings\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const SimulationReport& r = rows[i].report;
        save_report(r, dir / ("report_" + std::to_string(i) + ".json"));
        summary << i << ",\"" << full_state_text(rows[i].x0) << "\"," << format_number(r.realized_cost) << ','
                << format_number(r.initial_q) << ',' << to_string(r.terminated) << ','
                << (r.all_monitors_passed ? "true" : "false") << ',' << (r.steps.empty() ? 0 : r.steps.size() - 1)
                << ',' << r.fallback_count << ',' << r.warnings.size() << '\n';
        std::printf("x0 = (%s): %s, J = %.6f, Q = %.6f, fallbacks = %zu%s\n", state_text(rows[i].x0).c_str(),
                    to_string(r.terminated), r.realized_cost, r.initial_q, r.fallback_count,
                    r.all_monitors_passed ? "" : "  [monitor failure]");
        if (!r.warnings.empty()) {
          std::printf("  %zu warnings, first: %s\n", r.warnings.size(), r.warnings.front().c_str());
        }
      }
      if (plot && store.state_dim() >= 2) cli::write_phase_plot(store, rows, dir / "simulate.svg", "Closed loop");
      const auto failures = cli::collect_failures(rows, policy.cost_bound_tol);
      for (const auto& row : rows) {
        if (row.report.terminated == Termination::Infeasible) {
          std::cerr << "PolicyInfeasible: x0 = (" << state_text(row.x0) << ")\n";
        }
      }
      report_failures(failures);
      return failures.empty() ? 0 : kExitFailed;
    }

    if (bench_cmd->parsed()) {
      bench.seed = g.seed;
      bench.feas_tol = g.tol;
      SafeSetStore store = g.dataset.empty() ? cli::make_bench_store(replicate) : load_dataset(g.dataset);
      if (!g.dataset.empty() && replicate > 1) {
        std::vector<Trajectory> extra;
        for (std::size_t r = 1; r < replicate; ++r) {
          extra.insert(extra.end(), store.trajectories().begin(), store.trajectories().end());
        }
        store = extend_safe_set(store, std::move(extra));
      }
      const auto rows = cli::run_bench(store, bench);
      const std::filesystem::path path = g.out.empty() ? std::string("bench.csv") : g.out;
      cli::write_bench_csv(rows, path);
      std::printf("store: %zu trajectories, %ld points\n", store.trajectories().size(),
                  static_cast<long>(store.column_count()));
      for (const auto& r : rows) {
        std::printf("%-6s  states %zu  variables %zu  median %.2f us  p95 %.2f us\n", r.mode.c_str(), r.count,
                    r.decision_variables, r.median_us, r.p95_us);
      }
      return 0;
    }

    if (val_cmd->parsed()) {
      if (g.dataset.empty()) throw Error("--dataset is required for this command");
      nlohmann::json doc = read_json_file(g.dataset);
      if (doc.is_object()) doc["validated"] = false;
      const SafeSetStore store = dataset_from_json(doc, g.dataset);
      std::size_t bad = 0;
      for (std::size_t j = 0; j < store.trajectories().size(); ++j) {
        const auto violations = validate_trajectory(store.trajectories()[j], store.system(), store.mode(),
                                                    validation_tol, &store.stage_cost());
        for (const auto& v : violations) std::printf("trajectory %zu: %s\n", j, v.message().c_str());
        bad += violations.empty() ? 0 : 1;
      }
      if (bad == 0) {
        try {
          build_safe_set(store.trajectories(), store.system(), store.stage_cost(), store.mode(), validation_tol);
        } catch (const ValidationError& e) {
          std::printf("%s\n", e.what());
          return kExitFailed;
        }
      }
      std::printf("%zu trajectories, %zu with violations; stage cost %s%s\n", store.trajectories().size(), bad,
                  store.stage_cost().name().c_str(), store.stage_cost().certified() ? "" : " (uncertified)");
      return bad == 0 ? 0 : kExitFailed;
    }
  } catch (const PolicyInfeasible& e) {
    std::cerr << "PolicyInfeasible: " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
