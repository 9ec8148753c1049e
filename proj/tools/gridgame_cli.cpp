// gridgame: command-line front end for the load-balancing game solver.
//
// Exit codes: 0 success, 1 invalid input, 2 non-convergence.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gridgame/costs.hpp"
#include "gridgame/equilibrium.hpp"
#include "gridgame/error.hpp"
#include "gridgame/experiments.hpp"
#include "gridgame/queueing.hpp"
#include "gridgame/report_io.hpp"
#include "gridgame/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace gridgame;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

struct Overrides {
  std::optional<double> load;
  double threshold = 1e-4;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  bool jacobi = false;
};

struct Output {
  std::string dir;
  std::string format = "csv";

  fs::path resolve() const {
    if (!dir.empty()) return dir;
    if (const char *env = std::getenv("GRIDGAME_OUTPUT_DIR"); env && *env) return env;
    return "results";
  }

  void write(const std::string &stem, const Table &table) const {
    const fs::path path = resolve() / (stem + "." + format);
    write_atomic(path, format == "json" ? table.to_json().dump(2) + "\n" : table.to_csv());
    std::cout << "  wrote " << path.string() << "\n";
  }
};

void add_overrides(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--load", o.load, "Rescale arrival rates to this system load")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--threshold", o.threshold, "Convergence threshold on the relative L1 change")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed recorded in reports and used by simulations");
}

void add_output(CLI::App *cmd, Output &out) {
  cmd->add_option("--output-dir", out.dir, "Directory for result files (env GRIDGAME_OUTPUT_DIR)");
  cmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

// Parses key=value tokens such as "k=0.001".
std::map<std::string, double> parse_pairs(const std::vector<std::string> &tokens) {
  std::map<std::string, double> out;
  for (const auto &tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kParse, "expected key=value, got '" + tok + "'");
    try {
      out[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
    } catch (const std::exception &) {
      throw Error(ErrorCode::kParse, "bad number in '" + tok + "'");
    }
  }
  return out;
}

double need(const std::map<std::string, double> &pairs, const std::string &key) {
  const auto it = pairs.find(key);
  if (it == pairs.end()) throw Error(ErrorCode::kParse, "missing " + key + "=...");
  return it->second;
}

Scenario load_with_overrides(const std::string &path, const Overrides &o) {
  Scenario s = load_scenario(path);
  if (o.load) s.config = scale_to_load(s.config, *o.load);
  validate(s.config);
  return s;
}

std::string sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

void print_matrix(const StrategyMatrix &a) {
  for (Index i = 0; i < a.rows(); ++i) {
    std::cout << "  s" << i << ":";
    for (Index j = 0; j < a.cols(); ++j) std::cout << " " << sig6(a(i, j));
    std::cout << "\n";
  }
}

int cmd_validate(const std::string &path, const Overrides &o) {
  Scenario s = load_scenario(path);
  if (o.load) s.config = scale_to_load(s.config, *o.load);
  const auto violations = check(s.config);
  if (violations.empty()) {
    std::cout << s.name << ": valid (n=" << s.config.num_schedulers() << ", m=" << s.config.num_nodes()
              << ", load=" << sig6(system_load(s.config)) << ")\n";
    return kExitOk;
  }
  std::cout << s.name << ": " << violations.size() << " violation(s)\n";
  for (const auto &v : violations) std::cout << "  " << to_string(v.code) << ": " << v.message << "\n";
  return kExitInvalid;
}

int cmd_solve(const std::string &path, const Overrides &o, const Output &out, bool write_file) {
  const Scenario s = load_with_overrides(path, o);
  NashOptions nash;
  nash.threshold = o.threshold;
  nash.max_iter = o.max_iter;
  nash.schedule = o.jacobi ? UpdateSchedule::kJacobi : UpdateSchedule::kGaussSeidel;
  const EquilibriumResult r = nash_iterate(s.config, nash);

  std::cout << "scenario " << s.name << " (n=" << s.config.num_schedulers()
            << ", m=" << s.config.num_nodes() << ", load=" << sig6(system_load(s.config)) << ")\n";
  std::cout << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
            << " iteration(s), threshold " << sig6(o.threshold) << ", last change "
            << sig6(r.change_trace.empty() ? 0.0 : r.change_trace.back()) << "\n";
  std::cout << "strategy:\n";
  print_matrix(r.strategy);
  std::cout << "alpha:";
  for (Index i = 0; i < r.alphas.size(); ++i) std::cout << " " << sig6(r.alphas(i));
  std::cout << "\nper-task power cost:";
  for (Index i = 0; i < r.per_scheduler_cost.size(); ++i) {
    std::cout << " " << sig6(r.per_scheduler_cost(i));
  }
  std::cout << "\n";

  if (write_file) {
    Table table;
    table.columns = {"scheduler", "node", "share", "alpha", "per_task_power", "iterations", "converged"};
    for (Index i = 0; i < r.strategy.rows(); ++i) {
      for (Index j = 0; j < r.strategy.cols(); ++j) {
        table.rows.push_back({std::to_string(i), std::to_string(j), format_number(r.strategy(i, j)),
                              format_number(r.alphas(i)), format_number(r.per_scheduler_cost(i)),
                              std::to_string(r.iterations), r.converged ? "1" : "0"});
      }
    }
    out.write("solve_" + s.name, table);
  }
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_baseline(const std::string &path, const Overrides &o) {
  const Scenario s = load_with_overrides(path, o);
  const StrategyMatrix a = average_allocation(s.config);
  std::cout << "scenario " << s.name << " average allocation 1/" << s.config.num_nodes() << "\n";
  std::cout << "per-task power cost:";
  for (Index i = 0; i < s.config.num_schedulers(); ++i) {
    std::cout << " " << sig6(per_task_power_cost(i, a, s.config));
  }
  std::cout << "\n";
  return kExitOk;
}

int cmd_experiment(const std::string &name, const std::string &path, const Overrides &o,
                   const Output &out) {
  Scenario s = load_scenario(path);
  validate(s.config);
  ExperimentOptions opts;
  opts.threshold = o.threshold;
  opts.max_iter = o.max_iter;
  opts.seed = o.seed;
  opts.load = o.load;
  const std::string stem = name + "_" + s.name;
  const auto loads = default_loads();

  auto all_converged = [](const std::vector<ExperimentPoint> &points) {
    for (const auto &p : points) {
      if (!p.game.converged) return false;
    }
    return true;
  };

  std::vector<ExperimentPoint> points;
  if (name == "convergence") {
    const ConvergenceRun run = run_convergence(s, opts);
    points.push_back(run.point);
    std::cout << "convergence " << s.name << ": " << run.change_trace.size() << " iteration(s), "
              << (run.point.game.converged ? "converged" : "NOT converged") << "\n";
    out.write(stem + "_trace", trace_table(run.change_trace));
  } else if (name == "load") {
    points = run_load_sweep(s, loads, opts);
    std::cout << "load " << s.name << ": " << points.size() << " load points\n";
  } else if (name == "nodes") {
    std::vector<Index> counts;
    for (Index m = 5; m <= std::min<Index>(16, s.config.num_nodes()); ++m) counts.push_back(m);
    points = run_node_sweep(s, counts, opts);
    std::cout << "nodes " << s.name << ": " << points.size() << " node counts\n";
  } else if (name == "schedulers") {
    std::vector<Index> counts;
    for (Index n = 2; n <= 10; ++n) counts.push_back(n);
    points = run_scheduler_sweep(s, counts, opts);
    std::cout << "schedulers " << s.name << ": " << points.size() << " scheduler counts\n";
  } else if (name == "pareto") {
    const ParetoSweep sweep = run_pareto_sweep(s, loads, opts);
    points = sweep.points;
    std::cout << "pareto " << s.name << ": " << sweep.moments.size() << " nodes, " << points.size()
              << " load points\n";
    for (const auto &m : sweep.moments) {
      std::cout << "  node " << m.node << " mean " << sig6(m.moments.mean) << " second moment "
                << sig6(m.moments.second_moment) << "\n";
    }
    out.write(stem + "_moments", moments_table(sweep.moments));
  } else if (name == "fairness") {
    const FairnessRun run = run_fairness(s, opts);
    std::cout << "fairness " << s.name << ": " << run.by_load.size() << " load points, "
              << run.by_nodes.size() << " node counts\n";
    for (const auto &p : run.by_load) {
      std::cout << "  load " << sig6(p.game.load) << " game FI " << sig6(p.game.fairness)
                << " average FI " << sig6(p.average.fairness) << "\n";
    }
    out.write(stem + "_nodes", report_table(run.by_nodes));
    points = run.by_load;
  } else if (name == "secondary") {
    const ExperimentPoint p = run_secondary_costs(s, opts);
    points.push_back(p);
    std::cout << "secondary " << s.name << ": normalized network/loss/utilization per scheduler\n";
    for (std::size_t k = 0; k < p.game.normalized.size(); ++k) {
      const auto &g = p.game.normalized[k];
      const auto &a = p.average.normalized[k];
      std::cout << "  s" << k << " game " << sig6(g.network) << "/" << sig6(g.loss) << "/"
                << sig6(g.utilization) << "  average " << sig6(a.network) << "/" << sig6(a.loss)
                << "/" << sig6(a.utilization) << "\n";
    }
  } else {
    std::cerr << "unknown experiment '" << name
              << "' (convergence, load, nodes, schedulers, pareto, fairness, secondary)\n";
    return kExitInvalid;
  }
  out.write(stem, report_table(points));
  return all_converged(points) ? kExitOk : kExitNotConverged;
}

struct SimulateArgs {
  std::vector<std::string> exp;
  std::vector<std::string> pareto;
  std::string scenario;
  Index node = 0;
  std::optional<double> rate;
  std::optional<double> load;
  std::int64_t tasks = 1'000'000;
  std::int64_t warmup = -1;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs &a) {
  NodeSpec node;
  if (!a.scenario.empty()) {
    const Scenario s = load_scenario(a.scenario);
    if (a.node < 0 || a.node >= s.config.num_nodes()) {
      throw Error(ErrorCode::kInvalidParameter, "node index out of range");
    }
    node = s.config.nodes[a.node];
  } else if (!a.exp.empty()) {
    const double mu = need(parse_pairs(a.exp), "mu");
    node.mu = mu;
    node.service = ServiceDistribution::exponential(mu);
  } else if (!a.pareto.empty()) {
    const auto p = parse_pairs(a.pareto);
    node.service = ServiceDistribution::bounded_pareto({need(p, "k"), need(p, "p"), need(p, "alpha")});
    node.mu = 1.0 / node.service.mean;
  } else {
    throw Error(ErrorCode::kParse, "simulate needs --scenario, --exp or --pareto");
  }
  if (a.rate.has_value() == a.load.has_value()) {
    throw Error(ErrorCode::kParse, "give exactly one of --rate or --load");
  }
  const double rate = a.rate ? *a.rate : *a.load / node.service.mean;
  if (rate < 0.0) throw Error(ErrorCode::kInvalidParameter, "rate must be >= 0");
  const double analytic = pk_mean_wait(rate, node.service);

  DesConfig cfg;
  cfg.node = node;
  cfg.arrival_streams = {{rate, 0}};
  cfg.horizon = a.tasks;
  cfg.warmup = a.warmup;
  cfg.seed = a.seed;
  const DesStats st = simulate_node(cfg);

  const double rel = analytic > 0.0 ? (st.mean_wait - analytic) / analytic : 0.0;
  std::cout << "service mean " << sig6(node.service.mean) << ", second moment "
            << sig6(node.service.second_moment) << ", rate " << sig6(rate) << ", utilisation "
            << sig6(rate * node.service.mean) << "\n";
  std::cout << "tasks " << st.measured << " measured (seed " << a.seed << ")\n";
  std::cout << "mean wait      DES " << sig6(st.mean_wait) << " +- " << sig6(st.ci95_wait)
            << "   analytic " << sig6(analytic) << "   rel.err " << sig6(rel) << "\n";
  std::cout << "mean service   DES " << sig6(st.mean_service) << "   analytic "
            << sig6(node.service.mean) << "\n";
  std::cout << "mean sojourn   DES " << sig6(st.mean_sojourn) << "   analytic "
            << sig6(analytic + node.service.mean) << "\n";
  std::cout << "utilisation    DES " << sig6(st.utilization) << "\n";
  return kExitOk;
}

int cmd_moments(const std::vector<std::string> &exp, const std::vector<std::string> &pareto) {
  Moments m;
  if (!pareto.empty()) {
    const auto p = parse_pairs(pareto);
    m = bounded_pareto_moments({need(p, "k"), need(p, "p"), need(p, "alpha")});
  } else if (!exp.empty()) {
    m = exponential_moments(need(parse_pairs(exp), "mu"));
  } else {
    throw Error(ErrorCode::kParse, "moments needs --exp mu=... or --pareto k=... p=... alpha=...");
  }
  std::cout << "mean " << sig6(m.mean) << "\nsecond_moment " << sig6(m.second_moment) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Non-cooperative grid load balancing: equilibrium solver and experiments"};
  app.require_subcommand(1);

  Overrides o;
  Output out;
  std::string scenario;
  std::string experiment;
  bool write_file = false;

  auto *validate_cmd = app.add_subcommand("validate", "Check a scenario against all constraints");
  validate_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--load", o.load, "Rescale to this load first")->check(CLI::Range(0.0, 1.0));

  auto *solve_cmd = app.add_subcommand("solve", "Iterate best responses to a Nash equilibrium");
  solve_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_overrides(solve_cmd, o);
  add_output(solve_cmd, out);
  solve_cmd->add_flag("--jacobi", o.jacobi, "Simultaneous instead of sequential updates");
  solve_cmd->add_flag("--write", write_file, "Also write the strategy table to the output dir");

  auto *baseline_cmd = app.add_subcommand("baseline", "Equal-split allocation costs");
  baseline_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_overrides(baseline_cmd, o);

  auto *exp_cmd = app.add_subcommand("experiment", "Run an experiment and write result tables");
  exp_cmd->add_option("name", experiment,
                      "convergence | load | nodes | schedulers | pareto | fairness | secondary")
      ->required();
  exp_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_overrides(exp_cmd, o);
  add_output(exp_cmd, out);

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Discrete-event M/G/1 run against the analytic wait");
  sim_cmd->add_option("--exp", sim.exp, "Exponential service: mu=<rate>");
  sim_cmd->add_option("--pareto", sim.pareto, "Bounded Pareto service: k=.. p=.. alpha=..");
  sim_cmd->add_option("--scenario", sim.scenario, "Take the node from a scenario file");
  sim_cmd->add_option("--node", sim.node, "Node index within --scenario");
  sim_cmd->add_option("--rate", sim.rate, "Arrival rate");
  sim_cmd->add_option("--load", sim.load, "Utilisation; rate = load / mean service");
  sim_cmd->add_option("--tasks", sim.tasks, "Tasks to simulate")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--warmup", sim.warmup, "Discarded tasks (default 10%)");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");

  std::vector<std::string> mom_exp;
  std::vector<std::string> mom_pareto;
  auto *mom_cmd = app.add_subcommand("moments", "Print service-time moments");
  mom_cmd->add_option("--exp", mom_exp, "mu=<rate>");
  mom_cmd->add_option("--pareto", mom_pareto, "k=.. p=.. alpha=..");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate_cmd) return cmd_validate(scenario, o);
    if (*solve_cmd) return cmd_solve(scenario, o, out, write_file);
    if (*baseline_cmd) return cmd_baseline(scenario, o);
    if (*exp_cmd) return cmd_experiment(experiment, scenario, o, out);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*mom_cmd) return cmd_moments(mom_exp, mom_pareto);
  } catch (const ValidationError &e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
