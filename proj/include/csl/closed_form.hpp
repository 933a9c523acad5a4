#pragma once

// Closed-form myopic policies and structural fits of solved policies.
//
// The myopic altruistic policy is a single symmetric cutoff: invest full
// precision when the public belief is uncertain enough, otherwise leave the
// baseline alone.  The myopic action-G-seeking policy is a five-threshold
// phase map whose last phase has no attained optimum (the supremum sits just
// below the informativeness boundary), so it is reported as an
// epsilon-optimal phase.  Fit routines reverse the direction: given a solved
// grid policy they recover phase intervals and thresholds and verify the
// expected ordering.

#include <Eigen/Core>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "csl/grid.hpp"
#include "csl/payoffs.hpp"
#include "csl/solver.hpp"

namespace csl {

enum class PhaseLabel : unsigned char { Baseline, Boundary, Full, EpsBelow };

std::string to_string(PhaseLabel label);

// q(b) = 1 on (t_m, 1-t_m), baseline p elsewhere.  t_m = cost(1-p)/C when
// full precision is worth buying at the boundary, else 1/2 (never invest).
struct MyopicAltruisticPolicy {
  double t_m = 0.5;
  double p = 0.7;
  double operator()(double b) const { return (b > t_m && b < 1.0 - t_m) ? 1.0 : p; }
};

MyopicAltruisticPolicy myopic_altruistic(const ModelParams& m);

// Phase map of the myopic action-G-seeking planner:
//   [0, t1]    baseline      (belief too low to fight the cascade)
//   (t1, 1-p]  boundary 1-b  (buy just enough informativeness)
//   (1-p, t2)  baseline
//   [t2, t3)   boundary 1-b
//   [t3, t4]   baseline
//   (t4, t5)   full precision
//   [t5, p]    just below boundary (epsilon-optimal; supremum not attained)
//   (p, 1]     baseline      (the cascade already goes the planner's way)
// Adjacent thresholds collapse when a phase is empty.
struct BiasedMyopicThresholds {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.5, t5 = 0.5;
  double p = 0.7;

  PhaseLabel classify(double b) const;
  double precision_at(double b, double eps) const;
};

// Thresholds by bisection to root_tol; the interior sign pattern of the
// boundary-vs-baseline margin is located by a 10^4-point lattice scan.
// Requires p < 1 (with a free perfect signal the phase map degenerates).
BiasedMyopicThresholds myopic_biased(const ModelParams& m, double root_tol = 1e-10);

struct PhaseInterval {
  PhaseLabel label;
  int lo = 0, hi = -1;        // inclusive grid index range; empty when hi < lo
  double lo_b = 0.0, hi_b = 0.0;
};

struct PhaseReport {
  PlannerKind planner = PlannerKind::Altruistic;
  std::vector<PhaseInterval> intervals;
  std::map<std::string, double> thresholds;
  double max_deviation = 0.0;  // worst |policy - phase value| over matched points
  bool structure_ok = false;
  std::vector<std::string> notes;
};

// Recovers the symmetric three-phase shape (baseline / boundary / full) and
// thresholds d_a <= t_a from a solved altruistic policy.  A point matches a
// phase when |policy - phase value| <= match_tol (one action-grid step is the
// natural choice).  Mismatches are reported, not thrown.
PhaseReport fit_altruistic_structure(const BeliefGrid& grid, const Eigen::ArrayXd& policy,
                                     const ModelParams& m, double match_tol);

// Verifies the solved action-G-seeking policy against its expected shape:
// baseline exactly on [0, t1] and on b > p, at-least-baseline on (t1, 1-p],
// at-least-boundary on (1-p, 1/2), at-least-b on exact points of [1/2, t2),
// and a single epsilon-flagged interval (t2, p] ending at p.
PhaseReport fit_biased_structure(const BeliefGrid& grid, const Eigen::ArrayXd& policy,
                                 const std::vector<PolicyFlag>& flags, const ModelParams& m,
                                 double match_tol);

// Rebuilds the idealized grid policy described by a report; fitting the
// result reproduces the report (used to pin down the fit conventions).
std::pair<Eigen::ArrayXd, std::vector<PolicyFlag>> reconstruct_policy(
    const PhaseReport& report, const BeliefGrid& grid, const ModelParams& m, double eps_pol);

}  // namespace csl
