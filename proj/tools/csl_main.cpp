// csl: solve / verify / simulate / sweep front end.
//
// Exit codes: 0 success, 1 usage error, 2 solver non-convergence,
// 3 structural verification failure, 4 integrity error or internal fault.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "csl/closed_form.hpp"
#include "csl/io.hpp"
#include "csl/rng.hpp"
#include "csl/simulate.hpp"
#include "csl/solver.hpp"
#include "csl/verify.hpp"

namespace fs = std::filesystem;
using csl::RunConfig;

namespace {

// Options write into `staged`; after parsing, explicitly-set flags are copied
// onto the config-file/default base so precedence is flags > file > defaults.
struct FlagSet {
  RunConfig staged;
  std::vector<std::function<void(RunConfig&)>> appliers;
  std::string config_path;

  template <typename T>
  void bind(CLI::App* cmd, const std::string& name, T RunConfig::*member,
            const std::string& desc) {
    CLI::Option* opt = cmd->add_option(name, staged.*member, desc);
    appliers.push_back([this, opt, member](RunConfig& dst) {
      if (opt->count() > 0) dst.*member = staged.*member;
    });
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = csl::load_run_config(config_path, cfg);
    for (const auto& apply : appliers) apply(cfg);
    return cfg;
  }
};

void register_flags(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config_path, "key=value config file (flags override it)");
  f.bind(cmd, "--planner", &RunConfig::planner, "altruistic | biased");
  f.bind(cmd, "--C", &RunConfig::C, "mistake cost C > 0");
  f.bind(cmd, "--p", &RunConfig::p, "baseline precision p in [0.5, 1)");
  f.bind(cmd, "--k", &RunConfig::k, "linear expenditure rate");
  f.bind(cmd, "--delta", &RunConfig::delta, "planner discount in [0, 1)");
  f.bind(cmd, "--cost-table", &RunConfig::cost_table,
         "tabulated expenditure 'offset:cost,...' (overrides --k)");
  f.bind(cmd, "--grid-n", &RunConfig::grid_n, "belief grid points (odd)");
  f.bind(cmd, "--action-m", &RunConfig::action_m, "precision grid points per sweep");
  f.bind(cmd, "--eps-pol", &RunConfig::eps_pol, "reporting gap for open-supremum phases");
  f.bind(cmd, "--tol", &RunConfig::tol, "convergence tolerance (0 = scaled default)");
  f.bind(cmd, "--max-iters", &RunConfig::max_iters, "value-iteration sweep cap");
  f.bind(cmd, "--horizon", &RunConfig::horizon, "agents per trajectory");
  f.bind(cmd, "--reps", &RunConfig::reps, "Monte Carlo replications");
  f.bind(cmd, "--seed", &RunConfig::seed, "base seed for counter RNG");
  f.bind(cmd, "--omega", &RunConfig::omega, "world draw: G | B | prior");
  f.bind(cmd, "--prior", &RunConfig::prior, "initial public belief");
  f.bind(cmd, "--agents", &RunConfig::agents, "bayesian | nonbayes:<confirm>,<contrary>");
  f.bind(cmd, "--policy", &RunConfig::policy,
         "optimal | myopic | constant:<q|p> | <solution.csv>");
  f.bind(cmd, "--out", &RunConfig::out, "output directory (default $OUT_DIR or ./out)");
  f.bind(cmd, "--jobs", &RunConfig::jobs, "worker threads");
  f.bind(cmd, "--sweep-k", &RunConfig::sweep_k, "comma list of k values");
  f.bind(cmd, "--sweep-p", &RunConfig::sweep_p, "comma list of p values");
  f.bind(cmd, "--sweep-delta", &RunConfig::sweep_delta, "comma list of delta values");
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir = cfg.out_dir();
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    std::vector<std::string> outputs, nlohmann::json extra = {}) {
  nlohmann::json j = csl::manifest_json(command, cfg, std::move(outputs));
  if (!extra.is_null()) j["run"] = std::move(extra);
  csl::write_json((dir / "manifest.json").string(), j);
}

int cmd_solve(const RunConfig& cfg) {
  const csl::ModelParams m = cfg.params();
  const csl::SolverConfig scfg = cfg.solver_config();
  const csl::PlannerKind kind = cfg.planner_kind();
  const csl::SolverResult res = csl::value_iterate(m, kind, scfg);

  const fs::path dir = prepare_out(cfg);
  csl::write_solution_csv((dir / "solution.csv").string(), res);
  nlohmann::json stats = csl::solver_stats_json(res);
  csl::write_json((dir / "solve.json").string(), stats);
  write_manifest(dir, "solve", cfg, {"solution.csv", "solve.json"}, stats);

  std::cout << "solve " << csl::to_string(kind) << ": " << res.iterations << " sweeps, residual "
            << res.residual << (res.converged ? "" : " (NOT CONVERGED)") << "\n"
            << "wrote " << (dir / "solution.csv").string() << "\n";
  return res.converged ? 0 : 2;
}

int cmd_verify(const RunConfig& cfg, const std::string& check_csv) {
  const csl::ModelParams m = cfg.params();
  const csl::SolverConfig scfg = cfg.solver_config();
  const csl::PlannerKind kind = cfg.planner_kind();
  const csl::SolverResult res = csl::value_iterate(m, kind, scfg);
  if (!res.converged) {
    std::cerr << "value iteration did not converge; nothing to verify\n";
    return 2;
  }

  if (!check_csv.empty()) {
    const csl::SolutionTable table = csl::read_solution_csv(check_csv);
    if (table.grid.size() != res.grid.size())
      throw csl::IntegrityError("checked file has a different grid size than this configuration");
    const double vtol = 10.0 * scfg.resolved_tol(m) + 1e-12;
    const double qtol = 0.5 / static_cast<double>(scfg.action_m - 1) + 1e-12;
    for (int i = 0; i < res.grid.size(); ++i) {
      if (std::abs(table.value[i] - res.value[i]) > vtol)
        throw csl::IntegrityError("value column disagrees with a fresh solve at b=" +
                                  csl::format_double(res.grid[i]));
      if (std::abs(table.policy[i] - res.policy[i]) > qtol)
        throw csl::IntegrityError("precision column disagrees with a fresh solve at b=" +
                                  csl::format_double(res.grid[i]));
    }
  }

  const std::vector<csl::VerifyCheck> checks = csl::structural_checks(m, kind, res, scfg);
  const double slack = 2.0 / static_cast<double>(scfg.action_m - 1);
  const csl::PhaseReport fit =
      kind == csl::PlannerKind::Altruistic
          ? csl::fit_altruistic_structure(res.grid, res.policy, m, slack)
          : csl::fit_biased_structure(res.grid, res.policy, res.flags, m, slack);

  const fs::path dir = prepare_out(cfg);
  csl::write_solution_csv((dir / "solution.csv").string(), res);
  csl::write_json((dir / "checks.json").string(), csl::checks_json(checks));
  csl::write_json((dir / "phase.json").string(), csl::phase_json(fit));
  write_manifest(dir, "verify", cfg, {"solution.csv", "checks.json", "phase.json"},
                 csl::solver_stats_json(res));

  bool all = true;
  for (const csl::VerifyCheck& c : checks) {
    all = all && c.pass;
    std::printf("%-22s %s  measured=% .6e  bound=% .6e\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.measured, c.bound);
  }
  std::cout << (all ? "all checks passed" : "verification FAILED") << "\n";
  return all ? 0 : 3;
}

// Policy sources: a fresh solve, the closed-form myopic rule, a constant
// (numeric or the symbol p), or a previously written solution file.
csl::PolicyFn resolve_policy(const RunConfig& cfg, const csl::ModelParams& m,
                             csl::PlannerKind kind, int* solve_status) {
  *solve_status = 0;
  if (cfg.policy == "optimal") {
    const csl::SolverResult res = csl::value_iterate(m, kind, cfg.solver_config());
    if (!res.converged) {
      *solve_status = 2;
      return {};
    }
    return csl::grid_policy(res.grid, res.policy);
  }
  if (cfg.policy == "myopic") {
    if (kind == csl::PlannerKind::Altruistic) return csl::myopic_altruistic(m);
    const csl::BiasedMyopicThresholds th = csl::myopic_biased(m);
    const double eps = cfg.eps_pol;
    return [th, eps](double b) { return th.precision_at(b, eps); };
  }
  const std::string prefix = "constant:";
  if (cfg.policy.rfind(prefix, 0) == 0) {
    const std::string arg = cfg.policy.substr(prefix.size());
    double q = m.p;
    if (arg != "p") {
      try {
        q = csl::parse_list(arg).at(0);
      } catch (const std::exception&) {
        throw std::invalid_argument("constant policy takes a number or 'p', got '" + arg + "'");
      }
    }
    if (!(q >= 0.5 && q <= 1.0))
      throw std::invalid_argument("constant policy precision must lie in [0.5, 1]");
    return csl::constant_policy(q);
  }
  if (!fs::exists(cfg.policy))
    throw std::invalid_argument("policy source '" + cfg.policy + "' is not a file or a known rule");
  const csl::SolutionTable table = csl::read_solution_csv(cfg.policy);
  return csl::grid_policy(table.grid, table.policy);
}

int cmd_simulate(const RunConfig& cfg) {
  const csl::ModelParams m = cfg.params();
  const csl::PlannerKind kind = cfg.planner_kind();
  const csl::AgentModel agent = cfg.agent_model();
  const csl::SimulationConfig sim = cfg.sim_config();
  if (cfg.policy.empty()) throw std::invalid_argument("simulate requires --policy");

  int solve_status = 0;
  const csl::PolicyFn policy = resolve_policy(cfg, m, kind, &solve_status);
  if (solve_status != 0) {
    std::cerr << "value iteration did not converge; no policy to simulate\n";
    return solve_status;
  }

  const csl::WelfareReport report = csl::estimate_welfare(m, kind, policy, agent, sim, cfg.jobs);

  // Full trajectories are bulky; keep the file proportionate and say so.
  const int kept = std::min(cfg.reps, 100);
  std::vector<csl::Trajectory> trajectories;
  trajectories.reserve(static_cast<std::size_t>(kept));
  for (int r = 0; r < kept; ++r)
    trajectories.push_back(csl::simulate_trajectory(m, kind, policy, agent, sim, r));

  const fs::path dir = prepare_out(cfg);
  csl::write_trajectory_csv((dir / "trajectories.csv").string(), trajectories);
  csl::write_json((dir / "welfare.json").string(), csl::welfare_json(report));
  nlohmann::json extra;
  extra["trajectories_written"] = kept;
  extra["trajectories_truncated"] = kept < cfg.reps;
  write_manifest(dir, "simulate", cfg, {"trajectories.csv", "welfare.json"}, extra);

  std::cout << "simulate: " << report.replications << " reps, welfare " << report.welfare_mean
            << " (se " << report.welfare_se << "), planner payoff " << report.payoff_mean
            << " (se " << report.payoff_se << "), cascades " << report.cascade_fraction << "\n"
            << "wrote " << (dir / "welfare.json").string() << "\n";
  return 0;
}

struct SweepRow {
  double k = 0.0, p = 0.0, delta = 0.0;
  std::string status = "ok";
  int iterations = 0;
  double residual = 0.0;
  int checks_passed = 0, checks_total = 0;
  double thr_low = std::nan(""), thr_high = std::nan(""), thr_myopic = std::nan("");
  bool full_phase_empty = true;
  double payoff_mean = std::nan(""), payoff_se = std::nan("");
  double baseline_mean = std::nan(""), baseline_se = std::nan("");
  double payoff_delta = std::nan("");
};

void run_sweep_row(const RunConfig& row_cfg, SweepRow& row, const fs::path& row_dir) {
  const csl::ModelParams m = row_cfg.params();
  const csl::SolverConfig scfg = row_cfg.solver_config();
  const csl::PlannerKind kind = row_cfg.planner_kind();

  const csl::SolverResult res = csl::value_iterate(m, kind, scfg);
  row.iterations = res.iterations;
  row.residual = res.residual;
  if (!res.converged) {
    row.status = "non-convergence";
    return;
  }

  fs::create_directories(row_dir);
  csl::write_solution_csv((row_dir / "solution.csv").string(), res);

  const std::vector<csl::VerifyCheck> checks = csl::structural_checks(m, kind, res, scfg);
  row.checks_total = static_cast<int>(checks.size());
  for (const csl::VerifyCheck& c : checks) row.checks_passed += c.pass ? 1 : 0;
  csl::write_json((row_dir / "checks.json").string(), csl::checks_json(checks));

  const double slack = 2.0 / static_cast<double>(scfg.action_m - 1);
  row.full_phase_empty = res.policy.maxCoeff() < 1.0 - slack;
  if (kind == csl::PlannerKind::Altruistic) {
    const csl::PhaseReport fit = csl::fit_altruistic_structure(res.grid, res.policy, m, slack);
    row.thr_low = fit.thresholds.at("d_a");
    row.thr_high = fit.thresholds.at("t_a");
    row.thr_myopic = fit.thresholds.at("t_m");
  } else {
    const csl::PhaseReport fit =
        csl::fit_biased_structure(res.grid, res.policy, res.flags, m, slack);
    row.thr_low = fit.thresholds.at("t1");
    row.thr_high = fit.thresholds.at("t2");
    row.thr_myopic = csl::myopic_biased(m).t4;
  }

  csl::SimulationConfig sim = row_cfg.sim_config();
  const csl::AgentModel agent = row_cfg.agent_model();
  const csl::PolicyFn solved = csl::grid_policy(res.grid, res.policy);
  const csl::WelfareReport on = csl::estimate_welfare(m, kind, solved, agent, sim, 1);
  const csl::WelfareReport off =
      csl::estimate_welfare(m, kind, csl::constant_policy(m.p), agent, sim, 1);
  row.payoff_mean = on.payoff_mean;
  row.payoff_se = on.payoff_se;
  row.baseline_mean = off.payoff_mean;
  row.baseline_se = off.payoff_se;
  row.payoff_delta = on.payoff_mean - off.payoff_mean;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweep_k.empty() && cfg.sweep_p.empty() && cfg.sweep_delta.empty())
    throw std::invalid_argument("sweep requires at least one of --sweep-k/--sweep-p/--sweep-delta");
  if (!cfg.cost_table.empty() && !cfg.sweep_k.empty())
    throw std::invalid_argument("--sweep-k conflicts with --cost-table");

  auto list_or = [](const std::string& text, double scalar, const char* what) {
    if (text.empty()) return std::vector<double>{scalar};
    std::vector<double> v;
    try {
      v = csl::parse_list(text);
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("bad ") + what + " list: " + e.what());
    }
    if (v.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
    return v;
  };
  const std::vector<double> ks = list_or(cfg.sweep_k, cfg.k, "k");
  const std::vector<double> ps = list_or(cfg.sweep_p, cfg.p, "p");
  const std::vector<double> ds = list_or(cfg.sweep_delta, cfg.delta, "delta");

  std::vector<SweepRow> rows;
  std::vector<RunConfig> row_cfgs;
  for (double k : ks)
    for (double p : ps)
      for (double d : ds) {
        RunConfig rc = cfg;
        rc.k = k;
        rc.p = p;
        rc.delta = d;
        rc.sweep_k.clear();
        rc.sweep_p.clear();
        rc.sweep_delta.clear();
        // Distinct random stream per row even though all rows share the seed.
        rc.seed = csl::mix_key(cfg.seed, rows.size(), ~0ull, csl::DrawPurpose::WorldState);
        SweepRow row;
        row.k = k;
        row.p = p;
        row.delta = d;
        rows.push_back(row);
        row_cfgs.push_back(std::move(rc));
      }

  const fs::path dir = prepare_out(cfg);
  const int jobs = std::max(1, cfg.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      char name[32];
      std::snprintf(name, sizeof(name), "row_%03zu", i);
      try {
        run_sweep_row(row_cfgs[i], rows[i], dir / name);
      } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
          if (c == ',' || c == '\n') c = ';';
        rows[i].status = "error: " + msg;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  const bool altruistic = cfg.planner_kind() == csl::PlannerKind::Altruistic;
  std::ofstream agg(dir / "sweep.csv");
  if (!agg) throw std::runtime_error("cannot open sweep.csv for writing");
  agg << "#schema=1\n";
  agg << "index,k,p,delta,status,iterations,residual,checks_passed,checks_total,"
      << (altruistic ? "d_a,t_a,t_m" : "t1,t2,t4") << ",full_phase_empty,"
      << "payoff_mean,payoff_se,baseline_mean,baseline_se,payoff_delta\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    agg << i << ',' << csl::format_double(r.k) << ',' << csl::format_double(r.p) << ','
        << csl::format_double(r.delta) << ',' << r.status << ',' << r.iterations << ','
        << csl::format_double(r.residual) << ',' << r.checks_passed << ',' << r.checks_total
        << ',' << csl::format_double(r.thr_low) << ',' << csl::format_double(r.thr_high) << ','
        << csl::format_double(r.thr_myopic) << ',' << (r.full_phase_empty ? 1 : 0) << ','
        << csl::format_double(r.payoff_mean) << ',' << csl::format_double(r.payoff_se) << ','
        << csl::format_double(r.baseline_mean) << ',' << csl::format_double(r.baseline_se) << ','
        << csl::format_double(r.payoff_delta) << '\n';
  }
  agg.close();

  write_manifest(dir, "sweep", cfg, {"sweep.csv"},
                 nlohmann::json{{"rows", rows.size()}, {"jobs", jobs}});

  std::size_t ok = 0;
  for (const SweepRow& r : rows) ok += r.status == "ok" ? 1 : 0;
  std::cout << "sweep: " << ok << "/" << rows.size() << " rows ok, wrote "
            << (dir / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential social learning under controlled information"};
  app.require_subcommand(1);

  FlagSet solve_flags, verify_flags, simulate_flags, sweep_flags;
  std::string check_csv;

  CLI::App* solve = app.add_subcommand("solve", "value-iterate and write the solution table");
  register_flags(solve, solve_flags);

  CLI::App* verify = app.add_subcommand("verify", "solve and run every structural check");
  register_flags(verify, verify_flags);
  verify->add_option("--check-csv", check_csv,
                     "existing solution file to validate against the fresh solve");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trajectories and welfare");
  register_flags(simulate, simulate_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "solve/verify/simulate a parameter grid");
  register_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags.resolve());
    if (verify->parsed()) return cmd_verify(verify_flags.resolve(), check_csv);
    if (simulate->parsed()) return cmd_simulate(simulate_flags.resolve());
    if (sweep->parsed()) return cmd_sweep(sweep_flags.resolve());
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const csl::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal fault: " << e.what() << "\n";
    return 4;
  }
}
