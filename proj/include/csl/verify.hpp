#pragma once

// Structural property checks on solved value functions and policies: the
// qualitative shape results that hold for every valid parameter set (value
// bounds, symmetry or monotonicity, convexity, phase layout, contraction of
// the iteration itself).  Checks report measurements instead of throwing so
// callers can aggregate them into machine-readable verification reports.

#include <string>
#include <vector>

#include "csl/payoffs.hpp"
#include "csl/solver.hpp"

namespace csl {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // worst observed value for the inequality tested
  double bound = 0.0;     // threshold it was compared against
};

// Runs every check applicable to the planner kind on a solved result.
// cfg must be the configuration the result was solved with.
std::vector<VerifyCheck> structural_checks(const ModelParams& m, PlannerKind kind,
                                           const SolverResult& res, const SolverConfig& cfg);

bool all_pass(const std::vector<VerifyCheck>& checks);

}  // namespace csl
