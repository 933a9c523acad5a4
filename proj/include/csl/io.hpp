#pragma once

// File formats: versioned CSV for grid-aligned solutions and trajectories,
// JSON for run manifests and reports, and the flat key=value run
// configuration with round-trip serialization.  Readers validate structure
// and raise IntegrityError on any malformed artifact so callers can tell
// a broken file apart from a failed check.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "csl/closed_form.hpp"
#include "csl/simulate.hpp"
#include "csl/solver.hpp"
#include "csl/verify.hpp"

namespace csl {

struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- solution CSV (#schema=1; columns b,value,precision,flag) ----

void write_solution_csv(const std::string& path, const SolverResult& res);

struct SolutionTable {
  BeliefGrid grid = BeliefGrid::uniform(3);
  Eigen::ArrayXd value;
  Eigen::ArrayXd policy;
  std::vector<PolicyFlag> flags;
};
SolutionTable read_solution_csv(const std::string& path);  // throws IntegrityError

// ---- trajectory CSV (#schema=1; one row per agent, replication column) ----

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajectories);

// ---- run configuration (flat key=value; unknown keys rejected) ----

struct RunConfig {
  std::string planner = "altruistic";
  double C = 1.0;
  double p = 0.7;
  double k = 0.5;
  double delta = 0.0;
  std::string cost_table;  // optional "offset:cost,offset:cost,..."; overrides k
  int grid_n = 1001;
  int action_m = 256;
  double eps_pol = 1e-4;
  double tol = 0.0;
  int max_iters = 100000;
  int horizon = 200;
  int reps = 2000;
  std::uint64_t seed = 1;
  std::string omega = "prior";  // G | B | prior
  double prior = 0.5;
  std::string agents = "bayesian";  // bayesian | nonbayes:<confirm>,<contrary>
  std::string policy = "optimal";   // optimal | myopic | constant:<p|value> | <path.csv>
  std::string out;                  // output directory; empty = $OUT_DIR or ./out
  int jobs = 1;
  std::string sweep_k, sweep_p, sweep_delta;  // comma lists for sweep rows

  bool operator==(const RunConfig&) const = default;

  ModelParams params() const;          // throws std::invalid_argument
  SolverConfig solver_config() const;
  SimulationConfig sim_config() const;
  PlannerKind planner_kind() const;
  AgentModel agent_model() const;
  std::string out_dir() const;         // resolves the OUT_DIR fallback
};

RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});
std::string serialize_run_config(const RunConfig& cfg);

std::vector<double> parse_list(const std::string& csv);  // "0.1,0.3" -> {0.1,0.3}

// ---- JSON reports ----

nlohmann::json params_json(const ModelParams& m);
nlohmann::json manifest_json(const std::string& command, const RunConfig& cfg,
                             const std::vector<std::string>& outputs);
nlohmann::json solver_stats_json(const SolverResult& res);
nlohmann::json welfare_json(const WelfareReport& rep);
nlohmann::json phase_json(const PhaseReport& rep);
nlohmann::json checks_json(const std::vector<VerifyCheck>& checks);

void write_json(const std::string& path, const nlohmann::json& j);

// Shortest-round-trip decimal rendering used by every CSV writer.
std::string format_double(double x);

}  // namespace csl
