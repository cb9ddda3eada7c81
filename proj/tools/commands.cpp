#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "datapolicy/study.hpp"

namespace datapolicy::cli {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string format_state(const Vector& x) {
  std::string s = "(";
  for (Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_number(x(i));
  return s + ")";
}

}  // namespace

std::vector<RunRow> run_many(const SafeSetStore& store, const std::vector<Vector>& x0s,
                             const PolicyConfig& config, std::size_t max_steps, unsigned threads) {
  std::vector<RunRow> rows(x0s.size());
  std::vector<std::string> errors(x0s.size());
  auto work = [&](std::size_t i) {
    rows[i].x0 = x0s[i];
    try {
      rows[i].report = run_closed_loop(store.system(), store, x0s[i], config, max_steps);
    } catch (const PolicyInfeasible& e) {
      rows[i].report.terminated = Termination::Infeasible;
      rows[i].report.all_monitors_passed = false;
      rows[i].report.failures.push_back(e.what());
    }
  };
  if (threads <= 1 || x0s.size() <= 1) {
    for (std::size_t i = 0; i < x0s.size(); ++i) work(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(x0s.size()));
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < x0s.size(); i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

std::vector<std::string> collect_failures(const std::vector<RunRow>& rows, double cost_bound_tol) {
  std::vector<std::string> out;
  for (const auto& row : rows) {
    const SimulationReport& r = row.report;
    for (const auto& f : r.failures) out.push_back("x0 = " + format_state(row.x0) + ": " + f);
    const bool at_goal = r.terminated == Termination::ReachedOrigin || r.terminated == Termination::ReachedTerminalSet;
    if (!at_goal && r.failures.empty()) {
      out.push_back("x0 = " + format_state(row.x0) + ": terminated " + to_string(r.terminated));
    }
    if (at_goal && !r.cost_bound_holds(cost_bound_tol) && r.certified) {
      out.push_back("x0 = " + format_state(row.x0) + ": J(x0) <= Q(x0) violated");
    }
  }
  return out;
}

Table1 run_table1(const SafeSetStore& seed, const PolicyConfig& config, unsigned threads) {
  Table1 t;
  t.rows = run_many(seed, study_initial_states(), config, kDefaultMaxSteps, threads);
  t.failures = collect_failures(t.rows, config.cost_bound_tol);
  return t;
}

void write_table1_csv(const Table1& table, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "x0_1,x0_2,J,Q,J_le_Q,steps,terminated,monitors_passed\n";
  for (const auto& row : table.rows) {
    const SimulationReport& r = row.report;
    out << format_number(row.x0(0)) << ',' << format_number(row.x0(1)) << ',' << format_number(r.realized_cost)
        << ',' << format_number(r.initial_q) << ',' << (r.realized_cost <= r.initial_q + 1e-6 ? "true" : "false")
        << ',' << (r.steps.empty() ? 0 : r.steps.size() - 1) << ',' << to_string(r.terminated) << ','
        << (r.all_monitors_passed ? "true" : "false") << '\n';
  }
}

Table2 run_table2(const SafeSetStore& seed, const std::optional<SafeSetStore>& second,
                  const PolicyConfig& config, const Table2Options& options, unsigned threads) {
  Table2 t;
  const std::vector<Vector> x0s = study_initial_states();
  const std::vector<Vector> replayed(x0s.begin() + 1, x0s.end());
  const std::vector<RunRow> seed_runs = run_many(seed, x0s, config, kDefaultMaxSteps, threads);
  t.failures = collect_failures(seed_runs, config.cost_bound_tol);
  if (!t.failures.empty()) return t;

  std::vector<Trajectory> extra1;
  for (std::size_t i = 1; i < seed_runs.size(); ++i) {
    Trajectory traj = report_to_trajectory(seed_runs[i].report, seed);
    if (options.exact_terminal) traj = append_origin_tail(traj, seed.system(), seed.stage_cost());
    extra1.push_back(std::move(traj));
  }
  t.store1.emplace(extend_safe_set(seed, std::move(extra1)));

  std::vector<Trajectory> extra2;
  if (second) {
    extra2 = second->trajectories();
  } else {
    const QuadStageCost* cost = seed.stage_cost().get_if<QuadStageCost>();
    if (cost == nullptr) throw Error("table2: the seed dataset must use a quadratic stage cost");
    ClqrConfig clqr;
    clqr.exact_terminal = options.exact_terminal;
    extra2.push_back(solve_clqr(seed.system(), *cost, study_second_seed_state(), clqr));
  }
  t.store2.emplace(extend_safe_set(seed, std::move(extra2)));

  t.runs1 = run_many(*t.store1, x0s, config, kDefaultMaxSteps, threads);
  t.runs2 = run_many(*t.store2, x0s, config, kDefaultMaxSteps, threads);
  for (const auto& f : collect_failures(t.runs1, config.cost_bound_tol)) t.failures.push_back("Q1 store: " + f);
  for (const auto& f : collect_failures(t.runs2, config.cost_bound_tol)) t.failures.push_back("Q2 store: " + f);

  for (std::size_t i = 0; i < x0s.size(); ++i) {
    Table2Row row;
    row.x0 = x0s[i];
    row.j_seed = seed_runs[i].report.realized_cost;
    row.j1 = t.runs1[i].report.realized_cost;
    row.q1 = t.runs1[i].report.initial_q;
    row.j2 = t.runs2[i].report.realized_cost;
    row.q2 = t.runs2[i].report.initial_q;
    row.q1_equals_j = std::abs(row.q1 - row.j_seed) <= options.equality_tol;
    row.j2_le_j1 = row.j2 <= row.j1 + options.equality_tol;
    if (!row.q1_equals_j) t.failures.push_back("x0 = " + format_state(row.x0) + ": Q1(x0) != J(x0)");
    if (!row.j2_le_j1) t.failures.push_back("x0 = " + format_state(row.x0) + ": J2(x0) > J1(x0)");
    t.rows.push_back(row);
  }
  return t;
}

void write_table2_csv(const Table2& table, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "x0_1,x0_2,J1,Q1,J2,Q2,J_seed,Q1_eq_J,J2_le_J1\n";
  for (const auto& r : table.rows) {
    out << format_number(r.x0(0)) << ',' << format_number(r.x0(1)) << ',' << format_number(r.j1) << ','
        << format_number(r.q1) << ',' << format_number(r.j2) << ',' << format_number(r.q2) << ','
        << format_number(r.j_seed) << ',' << (r.q1_equals_j ? "true" : "false") << ','
        << (r.j2_le_j1 ? "true" : "false") << '\n';
  }
}

SafeSetStore make_bench_store(std::size_t replicate) {
  if (replicate < 1) throw Error("bench: replicate must be at least 1");
  const LtiSystem sys = double_integrator();
  const StageCost cost(study_cost());
  const double starts[][2] = {{5, 0}, {-5, 0}, {4, -0.1}, {-4, 0.1}, {3, 0.05}, {-3, -0.05}, {6, -0.2}, {-6, 0.2}};
  std::vector<Trajectory> base;
  for (std::size_t j = 0; j < 8; ++j) {
    const double pole = 0.95 + 0.002 * static_cast<double>(j);
    Matrix gain(1, 2);
    gain << (1.0 - pole) * (1.0 - pole), 2.0 - 2.0 * pole;
    std::vector<Vector> states{(Vector(2) << starts[j][0], starts[j][1]).finished()};
    std::vector<Vector> inputs;
    while (states.back().squaredNorm() > kOriginEpsilon) {
      inputs.push_back(-gain * states.back());
      states.push_back(step(sys, states.back(), inputs.back()));
    }
    inputs.push_back(Vector::Zero(1));
    base.push_back(append_origin_tail(make_trajectory(std::move(states), std::move(inputs), cost), sys, cost));
  }
  std::vector<Trajectory> all;
  for (std::size_t r = 0; r < replicate; ++r) all.insert(all.end(), base.begin(), base.end());
  return build_safe_set(std::move(all), sys, cost, OriginMode{});
}

namespace {

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class F>
double time_us(F&& f, std::size_t repeats) {
  double best = INFINITY;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  return best;
}

}  // namespace

std::vector<BenchRow> run_bench(const SafeSetStore& store, const BenchOptions& options) {
  PolicyConfig config;
  config.feas_tol = options.feas_tol;
  config.check_candidate_shift = false;
  std::vector<Vector> states;
  std::uint64_t seed = options.seed;
  while (states.size() < options.max_states) {
    const Vector x0 = sample_in_safe_set(store, 1, seed++).front();
    const SimulationReport r = run_closed_loop(store.system(), store, x0, config);
    for (const auto& s : r.steps) {
      if (states.size() < options.max_states) states.push_back(s.state);
    }
    if (seed - options.seed > 1000) break;
  }

  std::vector<double> global_us;
  std::vector<double> local_us;
  std::size_t local_vars = 0;
  volatile double sink = 0.0;
  for (const auto& x : states) {
    global_us.push_back(time_us(
        [&] {
          const QueryResult q = eval_q_global(store, x, options.feas_tol);
          if (q.feasible) sink = sink + q.combine(store.input_matrix())(0);
        },
        options.repeats));
    local_us.push_back(time_us(
        [&] {
          const QueryResult q = eval_q_local(store, x, options.n_neighbors, options.feas_tol);
          if (q.feasible) sink = sink + q.combine(store.input_matrix())(0);
        },
        options.repeats));
  }
  local_vars = knn_select(store, states.empty() ? Vector::Zero(store.state_dim()) : states.front(),
                          options.n_neighbors)
                   .total();

  BenchRow g{"global", states.size(), static_cast<std::size_t>(store.column_count()), median(global_us),
             percentile(global_us, 0.95)};
  BenchRow l{"local", states.size(), local_vars, median(local_us), percentile(local_us, 0.95)};
  return {g, l};
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "mode,count,decision_variables,median_us,p95_us\n";
  for (const auto& r : rows) {
    out << r.mode << ',' << r.count << ',' << r.decision_variables << ',' << format_number(r.median_us) << ','
        << format_number(r.p95_us) << '\n';
  }
}

std::vector<Vector> sample_in_safe_set(const SafeSetStore& store, std::size_t count, std::uint64_t seed,
                                       std::size_t support) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, store.column_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  for (std::size_t s = 0; s < count; ++s) {
    Vector x = Vector::Zero(store.state_dim());
    double total = 0.0;
    std::vector<std::pair<Index, double>> terms;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, support); ++i) {
      const double w = -std::log(1.0 - unit(rng));
      terms.emplace_back(pick(rng), w);
      total += w;
    }
    for (const auto& [c, w] : terms) x += (w / total) * store.point_matrix().col(c);
    out.push_back(x);
  }
  return out;
}

void write_phase_plot(const SafeSetStore& store, const std::vector<RunRow>& rows,
                      const std::filesystem::path& path, const std::string& title) {
  const LtiSystem& sys = store.system();
  if (sys.state_dim() < 2) throw Error("plot: needs a state dimension of at least 2");
  double lo_x = sys.state_lower(0), hi_x = sys.state_upper(0);
  double lo_y = sys.state_lower(1), hi_y = sys.state_upper(1);
  const double margin_x = 0.05 * (hi_x - lo_x), margin_y = 0.05 * (hi_y - lo_y);
  lo_x -= margin_x; hi_x += margin_x; lo_y -= margin_y; hi_y += margin_y;
  const double width = 640.0, height = 640.0, pad = 40.0;
  auto px = [&](double x) { return pad + (x - lo_x) / (hi_x - lo_x) * (width - 2 * pad); };
  auto py = [&](double y) { return height - pad - (y - lo_y) / (hi_y - lo_y) * (height - 2 * pad); };

  std::ofstream out = open_output(path);
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
  out << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << title
      << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\" "
                "stroke-dasharray=\"6 3\"/>\n",
                px(sys.state_lower(0)), py(sys.state_upper(1)), px(sys.state_upper(0)) - px(sys.state_lower(0)),
                py(sys.state_lower(1)) - py(sys.state_upper(1)));
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>\n"
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>\n",
                px(lo_x), py(0), px(hi_x), py(0), px(0), py(lo_y), px(0), py(hi_y));
  out << buf;
  for (Index c = 0; c < store.column_count(); ++c) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"#1f77b4\"/>\n",
                  px(store.point_matrix()(0, c)), py(store.point_matrix()(1, c)));
    out << buf;
  }
  const char* colors[] = {"#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
                          "#17becf"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << colors[i % 9] << "\" points=\"";
    for (const auto& s : rows[i].report.steps) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.state(0)), py(s.state(1)));
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "<text x=\"320\" y=\"632\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">x1</text>\n";
  out << "<text x=\"12\" y=\"320\" font-family=\"sans-serif\" font-size=\"12\">x2</text>\n";
  out << "</svg>\n";
}

}  // namespace datapolicy::cli
