#include "csl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace csl {

std::string format_double(double x) {
  char buf[32];
  const auto [_, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, static_cast<std::size_t>(_ - buf));
}

namespace {

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw IntegrityError(std::string("bad numeric field for ") + what + ": '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IntegrityError(std::string("bad integer field for ") + what + ": '" + s + "'");
  return v;
}

// Config text comes from the user, so malformed numbers there are usage
// errors, not data-integrity failures.
double config_double(const std::string& s, const char* what) {
  try {
    return parse_double(s, what);
  } catch (const IntegrityError& e) {
    throw std::invalid_argument(e.what());
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

const char* flag_name(PolicyFlag f) {
  return f == PolicyFlag::EpsilonOptimal ? "eps" : "exact";
}

}  // namespace

void write_solution_csv(const std::string& path, const SolverResult& res) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "#schema=1\n";
  out << "b,value,precision,flag\n";
  const int n = res.grid.size();
  for (int i = 0; i < n; ++i) {
    out << format_double(res.grid[i]) << ',' << format_double(res.value[i]) << ','
        << format_double(res.policy[i]) << ',' << flag_name(res.flags[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SolutionTable read_solution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("cannot open solution file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "#schema=1")
    throw IntegrityError("missing or unsupported schema line in " + path);
  if (!std::getline(in, line) || trim(line) != "b,value,precision,flag")
    throw IntegrityError("unexpected header in " + path);

  std::vector<double> b, v, q;
  std::vector<PolicyFlag> flags;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    if (cols.size() != 4) throw IntegrityError("row with wrong column count in " + path);
    b.push_back(parse_double(cols[0], "b"));
    v.push_back(parse_double(cols[1], "value"));
    q.push_back(parse_double(cols[2], "precision"));
    if (cols[3] == "exact")
      flags.push_back(PolicyFlag::Exact);
    else if (cols[3] == "eps")
      flags.push_back(PolicyFlag::EpsilonOptimal);
    else
      throw IntegrityError("unknown flag '" + cols[3] + "' in " + path);
  }
  const int n = static_cast<int>(b.size());
  if (n < 3 || n % 2 == 0) throw IntegrityError("solution must have an odd point count >= 3");

  SolutionTable table;
  table.grid = BeliefGrid::uniform(n);
  table.value.resize(n);
  table.policy.resize(n);
  table.flags = std::move(flags);
  for (int i = 0; i < n; ++i) {
    if (std::abs(b[i] - table.grid[i]) > 1e-12)
      throw IntegrityError("belief column is not the uniform grid on [0,1]");
    if (!(q[i] >= 0.5 && q[i] <= 1.0))
      throw IntegrityError("precision outside [0.5,1] in " + path);
    table.value[i] = v[i];
    table.policy[i] = q[i];
  }
  return table;
}

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "#schema=1\n";
  out << "replication,index,belief,precision,signal,action,private_belief,reward,correct,"
         "responsive\n";
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    for (const TrajectoryStep& s : trajectories[r].steps) {
      out << r << ',' << s.index << ',' << format_double(s.public_belief) << ','
          << format_double(s.precision) << ',' << (s.signal == Signal::G ? 'G' : 'B') << ','
          << (s.action == Action::G ? 'G' : 'B') << ',' << format_double(s.private_belief) << ','
          << format_double(s.reward) << ',' << (s.correct ? 1 : 0) << ','
          << (s.responsive ? 1 : 0) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams RunConfig::params() const {
  ModelParams m;
  m.C = C;
  m.p = p;
  m.delta = delta;
  if (cost_table.empty()) {
    m.cost = CostSpec::linear(k);
  } else {
    std::vector<std::pair<double, double>> pts;
    for (const std::string& entry : split(cost_table, ',')) {
      const auto pair = split(trim(entry), ':');
      if (pair.size() != 2)
        throw std::invalid_argument("cost_table entries must be offset:cost pairs");
      pts.emplace_back(config_double(trim(pair[0]), "cost_table offset"),
                       config_double(trim(pair[1]), "cost_table cost"));
    }
    m.cost = CostSpec::tabulated(std::move(pts));
  }
  m.validate();
  return m;
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig cfg;
  cfg.grid_n = grid_n;
  cfg.action_m = action_m;
  cfg.eps_pol = eps_pol;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.validate();
  return cfg;
}

SimulationConfig RunConfig::sim_config() const {
  SimulationConfig cfg;
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.prior = prior;
  if (omega == "G")
    cfg.world = WorldDraw::FixedG;
  else if (omega == "B")
    cfg.world = WorldDraw::FixedB;
  else if (omega == "prior")
    cfg.world = WorldDraw::FromPrior;
  else
    throw std::invalid_argument("omega must be G, B, or prior");
  cfg.validate();
  return cfg;
}

PlannerKind RunConfig::planner_kind() const { return planner_from_string(planner); }

AgentModel RunConfig::agent_model() const {
  if (agents == "bayesian") return AgentModel::bayesian();
  const std::string prefix = "nonbayes:";
  if (agents.rfind(prefix, 0) == 0) {
    const auto parts = split(agents.substr(prefix.size()), ',');
    if (parts.size() != 2)
      throw std::invalid_argument("agents=nonbayes takes two parameters: <confirm>,<contrary>");
    return AgentModel::parametric(config_double(trim(parts[0]), "lambda_confirm"),
                                  config_double(trim(parts[1]), "lambda_contrary"));
  }
  throw std::invalid_argument("agents must be 'bayesian' or 'nonbayes:<confirm>,<contrary>'");
}

std::string RunConfig::out_dir() const {
  if (!out.empty()) return out;
  if (const char* env = std::getenv("OUT_DIR"); env && *env) return env;
  return "out";
}

namespace {

template <typename T>
void set_scalar(T& field, const std::string& value, const std::string& key) {
  if constexpr (std::is_same_v<T, std::string>) {
    field = value;
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    field = parse_u64(value, key.c_str());
  } else if constexpr (std::is_same_v<T, int>) {
    field = static_cast<int>(parse_u64(value, key.c_str()));
  } else {
    field = parse_double(value, key.c_str());
  }
}

void apply_key(RunConfig& base, const std::string& key, const std::string& value) {
  if (key == "planner") set_scalar(base.planner, value, key);
  else if (key == "C") set_scalar(base.C, value, key);
  else if (key == "p") set_scalar(base.p, value, key);
  else if (key == "k") set_scalar(base.k, value, key);
  else if (key == "delta") set_scalar(base.delta, value, key);
  else if (key == "cost_table") set_scalar(base.cost_table, value, key);
  else if (key == "grid_n") set_scalar(base.grid_n, value, key);
  else if (key == "action_m") set_scalar(base.action_m, value, key);
  else if (key == "eps_pol") set_scalar(base.eps_pol, value, key);
  else if (key == "tol") set_scalar(base.tol, value, key);
  else if (key == "max_iters") set_scalar(base.max_iters, value, key);
  else if (key == "horizon") set_scalar(base.horizon, value, key);
  else if (key == "reps") set_scalar(base.reps, value, key);
  else if (key == "seed") set_scalar(base.seed, value, key);
  else if (key == "omega") set_scalar(base.omega, value, key);
  else if (key == "prior") set_scalar(base.prior, value, key);
  else if (key == "agents") set_scalar(base.agents, value, key);
  else if (key == "policy") set_scalar(base.policy, value, key);
  else if (key == "out") set_scalar(base.out, value, key);
  else if (key == "jobs") set_scalar(base.jobs, value, key);
  else if (key == "sweep_k") set_scalar(base.sweep_k, value, key);
  else if (key == "sweep_p") set_scalar(base.sweep_p, value, key);
  else if (key == "sweep_delta") set_scalar(base.sweep_delta, value, key);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto pos = t.find('=');
    if (pos == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(t.substr(0, pos));
    const std::string value = trim(t.substr(pos + 1));
    try {
      apply_key(base, key, value);
    } catch (const IntegrityError& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base));
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "planner=" << c.planner << '\n';
  out << "C=" << format_double(c.C) << '\n';
  out << "p=" << format_double(c.p) << '\n';
  out << "k=" << format_double(c.k) << '\n';
  out << "delta=" << format_double(c.delta) << '\n';
  out << "cost_table=" << c.cost_table << '\n';
  out << "grid_n=" << c.grid_n << '\n';
  out << "action_m=" << c.action_m << '\n';
  out << "eps_pol=" << format_double(c.eps_pol) << '\n';
  out << "tol=" << format_double(c.tol) << '\n';
  out << "max_iters=" << c.max_iters << '\n';
  out << "horizon=" << c.horizon << '\n';
  out << "reps=" << c.reps << '\n';
  out << "seed=" << c.seed << '\n';
  out << "omega=" << c.omega << '\n';
  out << "prior=" << format_double(c.prior) << '\n';
  out << "agents=" << c.agents << '\n';
  out << "policy=" << c.policy << '\n';
  out << "out=" << c.out << '\n';
  out << "jobs=" << c.jobs << '\n';
  out << "sweep_k=" << c.sweep_k << '\n';
  out << "sweep_p=" << c.sweep_p << '\n';
  out << "sweep_delta=" << c.sweep_delta << '\n';
  return out.str();
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  if (trim(csv).empty()) return out;
  for (const std::string& item : split(csv, ','))
    out.push_back(config_double(trim(item), "list entry"));
  return out;
}

nlohmann::json params_json(const ModelParams& m) {
  nlohmann::json j;
  j["C"] = m.C;
  j["p"] = m.p;
  j["delta"] = m.delta;
  if (m.cost.is_linear()) {
    j["cost"] = {{"kind", "linear"}, {"k", m.cost.linear_rate()}};
  } else {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [x, c] : m.cost.table()) pts.push_back({x, c});
    j["cost"] = {{"kind", "tabulated"}, {"points", pts}};
  }
  return j;
}

nlohmann::json manifest_json(const std::string& command, const RunConfig& cfg,
                             const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["version"] = "0.1.0";
  j["command"] = command;
  {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = buf;
  }
  {
    nlohmann::json kv;
    std::istringstream in(serialize_run_config(cfg));
    std::string row;
    while (std::getline(in, row)) {
      const auto pos = row.find('=');
      if (pos != std::string::npos) kv[row.substr(0, pos)] = row.substr(pos + 1);
    }
    j["config"] = kv;
  }
  j["params"] = params_json(cfg.params());
  j["outputs"] = outputs;
  return j;
}

nlohmann::json solver_stats_json(const SolverResult& res) {
  nlohmann::json j;
  j["grid_n"] = res.grid.size();
  j["iterations"] = res.iterations;
  j["residual"] = res.residual;
  j["converged"] = res.converged;
  j["value_min"] = res.value.minCoeff();
  j["value_max"] = res.value.maxCoeff();
  return j;
}

nlohmann::json welfare_json(const WelfareReport& r) {
  nlohmann::json j;
  j["replications"] = r.replications;
  j["horizon"] = r.horizon;
  j["delta"] = r.delta;
  j["welfare"] = {{"mean", r.welfare_mean}, {"se", r.welfare_se}};
  j["planner_payoff"] = {{"mean", r.payoff_mean}, {"se", r.payoff_se}};
  j["expenditure"] = {{"mean", r.expenditure_mean}, {"se", r.expenditure_se}};
  j["cascade"] = {{"fraction", r.cascade_fraction},
                  {"mean_entry", r.cascade_mean_entry},
                  {"direction_g", r.direction_g},
                  {"direction_b", r.direction_b}};
  j["truncation_bound"] = r.truncation_bound;
  return j;
}

nlohmann::json phase_json(const PhaseReport& r) {
  nlohmann::json j;
  j["planner"] = to_string(r.planner);
  j["structure_ok"] = r.structure_ok;
  j["max_deviation"] = r.max_deviation;
  j["thresholds"] = r.thresholds;
  nlohmann::json ivs = nlohmann::json::array();
  for (const PhaseInterval& iv : r.intervals) {
    ivs.push_back({{"phase", to_string(iv.label)},
                   {"lo_index", iv.lo},
                   {"hi_index", iv.hi},
                   {"lo_b", iv.lo_b},
                   {"hi_b", iv.hi_b}});
  }
  j["intervals"] = ivs;
  j["notes"] = r.notes;
  return j;
}

nlohmann::json checks_json(const std::vector<VerifyCheck>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const VerifyCheck& c : checks)
    arr.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"bound", c.bound}});
  return arr;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace csl
