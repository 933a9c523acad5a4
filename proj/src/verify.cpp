#include "csl/verify.hpp"

#include <algorithm>
#include <cmath>

#include "csl/closed_form.hpp"

namespace csl {

namespace {

void check_bounds(std::vector<VerifyCheck>& out, const ModelParams& m, const SolverResult& res,
                  double tol) {
  const double lo = -m.C / (1.0 - m.delta) - tol;
  out.push_back({"value_upper_bound", res.value.maxCoeff() <= 0.0, res.value.maxCoeff(), 0.0});
  out.push_back({"value_lower_bound", res.value.minCoeff() >= lo, res.value.minCoeff(), lo});
}

void check_contraction(std::vector<VerifyCheck>& out, const ModelParams& m,
                       const SolverResult& res) {
  // Residuals near the stopping tolerance are dominated by rounding noise
  // (each is a difference of values of magnitude C/(1-delta)), so ratios are
  // only meaningful well above that floor.
  const double bound = m.delta + 1e-6;
  const double floor = 1e-6 * m.C / (1.0 - m.delta);
  double worst = 0.0;
  for (std::size_t k = 1; k < res.sweep_residuals.size(); ++k) {
    const double prev = res.sweep_residuals[k - 1];
    if (prev <= floor) continue;
    worst = std::max(worst, res.sweep_residuals[k] / prev);
  }
  out.push_back({"contraction", worst <= bound, worst, bound});
}

void checks_altruistic(std::vector<VerifyCheck>& out, const ModelParams& m,
                       const SolverResult& res, const SolverConfig& cfg, double tol) {
  const int n = res.grid.size();
  const double h = res.grid.spacing();

  double asym = 0.0;
  for (int i = 0; i < n; ++i) asym = std::max(asym, std::abs(res.value[i] - res.value[n - 1 - i]));
  out.push_back({"symmetry", asym <= 2.0 * tol, asym, 2.0 * tol});

  const double end_val = std::max(std::abs(res.value[0]), std::abs(res.value[n - 1]));
  out.push_back({"endpoint_values", end_val <= 2.0 * tol, end_val, 2.0 * tol});
  const double end_pol =
      std::max(std::abs(res.policy[0] - m.p), std::abs(res.policy[n - 1] - m.p));
  out.push_back({"endpoint_policy", end_pol == 0.0, end_pol, 0.0});

  // Discrete convexity of the value function, with an allowance for the
  // kinks the grid and action discretization introduce at phase boundaries.
  const double convex_bound = -5e-3 * m.C / (1.0 - m.delta);
  double min_dd = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    min_dd = std::min(min_dd, res.value[i - 1] - 2.0 * res.value[i] + res.value[i + 1]);
  out.push_back({"convexity", min_dd >= convex_bound, min_dd, convex_bound});

  // The forward-looking planner never invests less than the myopic one,
  // up to one action-grid step.
  const MyopicAltruisticPolicy myo = myopic_altruistic(m);
  const double slack = 2.0 / static_cast<double>(cfg.action_m - 1);
  double worst_gap = -1.0;
  for (int i = 0; i < n; ++i) worst_gap = std::max(worst_gap, myo(res.grid[i]) - res.policy[i]);
  out.push_back({"myopic_floor", worst_gap <= slack, worst_gap, slack});

  const PhaseReport fit = fit_altruistic_structure(res.grid, res.policy, m, slack);
  const double d_a = fit.thresholds.at("d_a");
  const double t_a = fit.thresholds.at("t_a");
  const double t_m = fit.thresholds.at("t_m");
  bool phase_ok = fit.structure_ok && d_a > 0.0 && d_a <= t_a && t_m <= 0.5;
  if (m.delta == 0.0) {
    // Without a future the optimum is the myopic cutoff itself.
    phase_ok = phase_ok && d_a == t_a && std::abs(t_a - t_m) <= h;
  } else {
    phase_ok = phase_ok && t_a <= t_m && (t_m >= 0.5 || d_a < t_m);
  }
  out.push_back({"phase_structure", phase_ok, fit.max_deviation, slack});

  if (m.delta == 0.0) {
    double mismatch = 0.0;
    for (int i = 0; i < n; ++i)
      mismatch = std::max(mismatch, std::abs(res.policy[i] - myo(res.grid[i])));
    out.push_back({"myopic_match", mismatch == 0.0, mismatch, 0.0});
  }
}

void checks_biased(std::vector<VerifyCheck>& out, const ModelParams& m, const SolverResult& res,
                   const SolverConfig& cfg, double tol) {
  const int n = res.grid.size();
  const double btol = 1e-9;

  double worst_drop = 0.0;
  for (int i = 1; i < n; ++i)
    worst_drop = std::min(worst_drop, res.value[i] - res.value[i - 1]);
  out.push_back({"monotone_value", worst_drop >= -2.0 * tol, worst_drop, -2.0 * tol});

  // Beliefs already past the baseline cascade point cost the planner nothing.
  double high_val = 0.0, high_pol = 0.0;
  bool high_flags = true;
  for (int i = 0; i < n; ++i) {
    if (res.grid[i] <= m.p + btol) continue;
    high_val = std::max(high_val, std::abs(res.value[i]));
    high_pol = std::max(high_pol, std::abs(res.policy[i] - m.p));
    high_flags = high_flags && res.flags[i] == PolicyFlag::Exact;
  }
  out.push_back({"high_region_value", high_val <= 2.0 * tol, high_val, 2.0 * tol});
  out.push_back({"high_region_policy", high_flags && high_pol == 0.0, high_pol, 0.0});

  const double v0_err = std::abs(res.value[0] + m.C / (1.0 - m.delta));
  out.push_back({"worst_case_value", v0_err <= 2.0 * tol, v0_err, 2.0 * tol});
  out.push_back({"worst_case_policy", res.policy[0] == m.p, std::abs(res.policy[0] - m.p), 0.0});

  const double slack = 2.0 / static_cast<double>(cfg.action_m - 1);
  const PhaseReport fit = fit_biased_structure(res.grid, res.policy, res.flags, m, slack);
  const double t1 = fit.thresholds.at("t1");
  const double t2 = fit.thresholds.at("t2");
  const bool phase_ok = fit.structure_ok && t1 <= 1.0 - m.p + res.grid.spacing() && 0.5 < t2 &&
                        t2 < m.p;
  out.push_back({"phase_structure", phase_ok, fit.max_deviation, slack});
}

}  // namespace

std::vector<VerifyCheck> structural_checks(const ModelParams& m, PlannerKind kind,
                                           const SolverResult& res, const SolverConfig& cfg) {
  const double tol = cfg.resolved_tol(m);
  std::vector<VerifyCheck> out;
  out.push_back({"converged", res.converged, res.residual, tol});
  check_bounds(out, m, res, tol);
  check_contraction(out, m, res);
  if (kind == PlannerKind::Altruistic)
    checks_altruistic(out, m, res, cfg, tol);
  else
    checks_biased(out, m, res, cfg, tol);
  return out;
}

bool all_pass(const std::vector<VerifyCheck>& checks) {
  for (const VerifyCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace csl
