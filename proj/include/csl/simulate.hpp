#pragma once

// Monte-Carlo forward simulation of the learning process under a planner
// policy, with either exact Bayesian agents or a parametric
// miscalibrated-updating family.  Each agent thresholds its private belief at
// 1/2 (ties follow the signal); the public observer always updates by Bayes,
// inverting the action to the signal wherever the acting agent's decision is
// signal-responsive under its actual updating rule.
//
// Randomness is counter-based: every draw is keyed by (seed, replication,
// agent, purpose), so replications are order-independent and runs that differ
// only in the agent model share signal realizations path by path.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "csl/belief.hpp"
#include "csl/grid.hpp"
#include "csl/payoffs.hpp"

namespace csl {

// Bayesian, or log-odds updating with slope lambda_confirm on signals that
// agree with the current belief lean and lambda_contrary on signals that
// oppose it (slope 1 when the belief is flat).  lambda_confirm in (0,1]
// dampens confirming evidence; lambda_contrary >= 1 amplifies contradicting
// evidence; (1,1) is exactly Bayes.
struct AgentModel {
  enum class Kind : unsigned char { Bayesian, ParametricNonBayesian };
  Kind kind = Kind::Bayesian;
  double lambda_confirm = 1.0;
  double lambda_contrary = 1.0;

  static AgentModel bayesian() { return {}; }
  static AgentModel parametric(double confirm, double contrary);

  void validate() const;  // throws std::invalid_argument
};

// Private posterior of a miscalibrated agent.  Degenerate beliefs are
// absorbing; q = 1/2 leaves the belief unchanged; q = 1 is conclusive.
double nonbayesian_update(const AgentModel& agent, double b, double q, Signal s);

// Private posterior under the agent's model (Bayes or parametric).
double agent_posterior(const AgentModel& agent, double b, double q, Signal s);

enum class WorldDraw : unsigned char { FixedG, FixedB, FromPrior };

struct SimulationConfig {
  int horizon = 200;        // number of agents per replication
  int replications = 1;
  std::uint64_t seed = 1;
  WorldDraw world = WorldDraw::FromPrior;
  double prior = 0.5;       // initial public belief

  void validate() const;
};

struct TrajectoryStep {
  int index;              // 1-based agent position
  double public_belief;   // before this agent acts
  double precision;
  Signal signal;
  Action action;
  double private_belief;
  double reward;          // realized planner flow payoff at this step
  bool correct;           // action matches the state
  bool responsive;        // flipping the signal would flip the action
};

struct Trajectory {
  WorldState world = WorldState::G;
  AgentModel agent;
  std::vector<TrajectoryStep> steps;
};

struct CascadeInfo {
  bool entered = false;
  int entry_index = 0;    // 1-based step at which actions stopped responding
  Action direction = Action::G;
};

using PolicyFn = std::function<double(double)>;

PolicyFn constant_policy(double q);
// Linear interpolation of a grid-aligned policy, clamped into [1/2, 1].
PolicyFn grid_policy(BeliefGrid grid, Eigen::ArrayXd policy);

Trajectory simulate_trajectory(const ModelParams& m, PlannerKind kind, const PolicyFn& policy,
                               const AgentModel& agent, const SimulationConfig& cfg,
                               int replication);

// First step whose action is signal-independent (or whose public belief is
// already degenerate); with a deterministic policy that state repeats forever.
CascadeInfo detect_cascade(const Trajectory& t);

struct WelfareReport {
  int replications = 0;
  int horizon = 0;
  double delta = 0.0;
  double welfare_mean = 0.0;      // discounted agent utility (-C per mistake)
  double welfare_se = 0.0;
  double payoff_mean = 0.0;       // discounted planner objective
  double payoff_se = 0.0;
  double expenditure_mean = 0.0;  // discounted precision spending
  double expenditure_se = 0.0;
  double cascade_fraction = 0.0;
  double cascade_mean_entry = 0.0;  // over replications that cascaded
  int direction_g = 0;
  int direction_b = 0;
  double truncation_bound = 0.0;  // delta^horizon * C / (1-delta)
};

// Replications run independently (optionally on `jobs` threads) and are
// reduced in replication order, so the report never depends on scheduling.
WelfareReport estimate_welfare(const ModelParams& m, PlannerKind kind, const PolicyFn& policy,
                               const AgentModel& agent, const SimulationConfig& cfg,
                               int jobs = 1);

}  // namespace csl
