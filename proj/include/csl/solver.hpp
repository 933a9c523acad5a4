#pragma once

// Discounted dynamic programming on the public-belief state.  The planner
// picks one precision per period; the belief then moves by the public update
// (a two-point jump where the action reveals the signal, frozen elsewhere).
// Values live on a uniform grid and children are evaluated by linear
// interpolation at their exact off-grid locations.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "csl/grid.hpp"
#include "csl/payoffs.hpp"

namespace csl {

enum class PolicyFlag : unsigned char { Exact, EpsilonOptimal };

struct SolverConfig {
  int grid_n = 1001;      // belief grid points, odd, >= 101
  int action_m = 256;     // uniform precision candidates on [0.5,1], >= 64
  double eps_pol = 1e-4;  // offset for the just-below-boundary candidate
  double tol = 0.0;       // sup-norm stopping tolerance; <= 0 means 1e-9 * C/(1-delta)
  int max_iters = 100000;

  void validate() const;               // throws std::invalid_argument
  double resolved_tol(const ModelParams& m) const;
};

struct SolverResult {
  BeliefGrid grid = BeliefGrid::uniform(3);
  Eigen::ArrayXd value;
  Eigen::ArrayXd policy;
  std::vector<PolicyFlag> flags;
  std::vector<double> sweep_residuals;  // sup-norm change after each sweep
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Precision chosen as a function of the current belief; used by the
// finite-horizon reference recursion and by restricted-action iteration.
struct ActionRule {
  enum class Kind : unsigned char { Constant, Baseline, Boundary, Full };
  Kind kind = Kind::Baseline;
  double value = 0.0;

  static ActionRule constant(double q) { return {Kind::Constant, q}; }
  static ActionRule baseline() { return {Kind::Baseline, 0.0}; }
  static ActionRule boundary() { return {Kind::Boundary, 0.0}; }
  static ActionRule full() { return {Kind::Full, 0.0}; }

  double precision(const ModelParams& m, double b) const;
};

// One-step Bellman operator with a precomputed candidate table.  Rewards,
// transition probabilities, and child interpolation cells depend only on
// (grid point, candidate), so they are built once and each sweep reduces to
// a fused multiply-add pass.  Ties in the maximization (within 1e-12 of the
// best value) resolve to the cheapest candidate, then the candidate closest
// to the baseline, then the smallest precision; this keeps argmax output
// deterministic and never spends cost that buys nothing.
class BellmanOperator {
 public:
  // Full planner action set: uniform candidates plus, per grid point,
  // {p, max(b,1-b), clamp(max(b,1-b)-eps_pol, 1/2, 1), 1}.
  BellmanOperator(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                  int action_m, double eps_pol);
  // Restricted action set given by explicit rules.
  BellmanOperator(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                  const std::vector<ActionRule>& rules);

  // V -> TV.
  Eigen::ArrayXd apply(const Eigen::ArrayXd& v) const;
  // V -> (TV, argmax precisions, flags).
  void extract(const Eigen::ArrayXd& v, Eigen::ArrayXd& tv, Eigen::ArrayXd& policy,
               std::vector<PolicyFlag>& flags) const;

  const BeliefGrid& grid() const noexcept { return grid_; }

 private:
  struct Candidate {
    double q = 0.5;
    double reward = 0.0;
    double py = 0.0, pz = 0.0;  // child weights; 0 disables the branch
    int ig = 0, ib = 0;         // child interpolation cells (self index when frozen)
    double wg = 0.0, wb = 0.0;
    bool eps_candidate = false;  // identity of the just-below-boundary candidate
  };

  void finalize_point(int i, std::vector<Candidate>& cands);
  double point_value(int i, const Eigen::ArrayXd& v, int* best_index) const;

  ModelParams m_;
  PlannerKind kind_;
  BeliefGrid grid_;
  double delta_;
  std::vector<Candidate> cands_;   // flattened, per point
  std::vector<int> offsets_;      // cands_ range per grid point
};

// Value iteration from V = 0 until the sup-norm sweep change falls below
// tol or max_iters sweeps have run (converged=false in that case).
SolverResult value_iterate(const ModelParams& m, PlannerKind kind, const SolverConfig& cfg);

// Same iteration but over an explicit rule set; runs exactly `sweeps` sweeps
// when sweeps > 0, otherwise to tolerance.
Eigen::ArrayXd value_iterate_restricted(const ModelParams& m, PlannerKind kind,
                                        const BeliefGrid& grid,
                                        const std::vector<ActionRule>& rules,
                                        int sweeps, double tol = 0.0);

// Discounted value of a fixed grid-aligned precision schedule.
Eigen::ArrayXd evaluate_policy(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                               const Eigen::ArrayXd& policy, double tol = 0.0);

// Exhaustive finite-horizon optimum over a small rule set, computed by exact
// recursion on (belief, horizon) with no grid anywhere.  Rejects horizons
// above 6: the recursion branches per signal and rule and is meant as an
// independent reference, not a production solver.
double finite_horizon_oracle(const ModelParams& m, PlannerKind kind, double b0, int horizon,
                             const std::vector<ActionRule>& rules);

}  // namespace csl
