#include "csl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csl/belief.hpp"

namespace csl {

namespace {

constexpr double kTieTol = 1e-12;

double planner_cost(const ModelParams& m, PlannerKind kind, double q) {
  return kind == PlannerKind::Altruistic ? cost_altruistic(m, q) : cost_biased(m, q);
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_n < 101 || grid_n % 2 == 0)
    throw std::invalid_argument("SolverConfig: grid_n must be odd and >= 101");
  if (action_m < 64) throw std::invalid_argument("SolverConfig: action_m must be >= 64");
  if (!(eps_pol > 0.0 && eps_pol <= 0.25))
    throw std::invalid_argument("SolverConfig: eps_pol must lie in (0, 0.25]");
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!std::isfinite(tol)) throw std::invalid_argument("SolverConfig: tol must be finite");
}

double SolverConfig::resolved_tol(const ModelParams& m) const {
  if (tol > 0.0) return tol;
  return 1e-9 * m.C / (1.0 - m.delta);
}

double ActionRule::precision(const ModelParams& m, double b) const {
  switch (kind) {
    case Kind::Constant: return std::clamp(value, 0.5, 1.0);
    case Kind::Baseline: return m.p;
    case Kind::Boundary: return std::clamp(std::max(b, 1.0 - b), 0.5, 1.0);
    case Kind::Full: return 1.0;
  }
  return m.p;
}

BellmanOperator::BellmanOperator(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                                 int action_m, double eps_pol)
    : m_(m), kind_(kind), grid_(grid), delta_(m.delta) {
  const int n = grid_.size();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  std::vector<Candidate> cands;
  for (int i = 0; i < n; ++i) {
    const double b = grid_[i];
    const double boundary = std::max(b, 1.0 - b);
    cands.clear();
    cands.reserve(action_m + 4);
    const double eps_q = std::clamp(boundary - eps_pol, 0.5, 1.0);
    for (int j = 0; j < action_m; ++j) {
      const double q = 0.5 * (1.0 + static_cast<double>(j) / static_cast<double>(action_m - 1));
      // Inside the epsilon window below the boundary the dedicated candidate
      // is the canonical representative of the unattained supremum.
      if (q > eps_q && q < boundary) continue;
      cands.push_back({.q = q});
    }
    cands.push_back({.q = m_.p});
    cands.push_back({.q = boundary});
    cands.push_back({.q = eps_q, .eps_candidate = eps_q < boundary});
    cands.push_back({.q = 1.0});
    finalize_point(i, cands);
    cands_.insert(cands_.end(), cands.begin(), cands.end());
    offsets_.push_back(static_cast<int>(cands_.size()));
  }
}

BellmanOperator::BellmanOperator(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                                 const std::vector<ActionRule>& rules)
    : m_(m), kind_(kind), grid_(grid), delta_(m.delta) {
  if (rules.empty()) throw std::invalid_argument("BellmanOperator: empty rule set");
  const int n = grid_.size();
  offsets_.push_back(0);
  std::vector<Candidate> cands;
  for (int i = 0; i < n; ++i) {
    cands.clear();
    for (const ActionRule& r : rules) cands.push_back({.q = r.precision(m_, grid_[i])});
    finalize_point(i, cands);
    cands_.insert(cands_.end(), cands.begin(), cands.end());
    offsets_.push_back(static_cast<int>(cands_.size()));
  }
}

// Fills rewards, transition weights, and child cells, orders candidates by
// tie preference, and removes duplicate precisions (keeping the non-epsilon
// identity so flags never fire on a coincidental overlap).
void BellmanOperator::finalize_point(int i, std::vector<Candidate>& cands) {
  const int n = grid_.size();
  const double b = grid_[i];
  // Self cell: weights that reproduce v[i] exactly under the fused pass.
  const int self_i = i < n - 1 ? i : n - 2;
  const double self_w = i < n - 1 ? 0.0 : 1.0;

  for (Candidate& c : cands) {
    c.reward = reward(m_, kind_, b, c.q);
    c.py = 0.0;
    c.pz = 0.0;
    c.ig = self_i;
    c.wg = self_w;
    c.ib = self_i;
    c.wb = self_w;
    if (signal_informative(b, c.q)) {
      const double y = signal_prob_good(b, c.q);
      const double z = signal_prob_bad(b, c.q);
      if (y > 0.0) {
        const BeliefGrid::Cell cell = grid_.locate(private_update(b, c.q, Signal::G));
        c.py = y;
        c.ig = cell.i;
        c.wg = cell.w;
      }
      if (z > 0.0) {
        const BeliefGrid::Cell cell = grid_.locate(private_update(b, c.q, Signal::B));
        c.pz = z;
        c.ib = cell.i;
        c.wb = cell.w;
      }
    } else {
      // The action never responds to the signal, so the belief stays put
      // with probability one.
      c.py = 1.0;
    }
  }

  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& c) {
    const double ca = planner_cost(m_, kind_, a.q);
    const double cc = planner_cost(m_, kind_, c.q);
    if (ca != cc) return ca < cc;
    const double da = std::abs(a.q - m_.p);
    const double dc = std::abs(c.q - m_.p);
    if (da != dc) return da < dc;
    if (a.q != c.q) return a.q < c.q;
    // Duplicate precisions: the epsilon identity stands in for the unattained
    // supremum, except at q = p where the optimum is attained by the baseline.
    return a.q == m_.p ? a.eps_candidate < c.eps_candidate
                       : a.eps_candidate > c.eps_candidate;
  });
  cands.erase(std::unique(cands.begin(), cands.end(),
                          [](const Candidate& a, const Candidate& c) { return a.q == c.q; }),
              cands.end());
}

double BellmanOperator::point_value(int i, const Eigen::ArrayXd& v, int* best_index) const {
  const double* vd = v.data();
  double best = -std::numeric_limits<double>::infinity();
  for (int c = offsets_[i]; c < offsets_[i + 1]; ++c) {
    const Candidate& cd = cands_[c];
    const double cont = cd.py * ((1.0 - cd.wg) * vd[cd.ig] + cd.wg * vd[cd.ig + 1]) +
                        cd.pz * ((1.0 - cd.wb) * vd[cd.ib] + cd.wb * vd[cd.ib + 1]);
    const double val = cd.reward + delta_ * cont;
    if (val > best) best = val;
  }
  if (best_index) {
    // First candidate in tie-preference order within kTieTol of the max.
    for (int c = offsets_[i]; c < offsets_[i + 1]; ++c) {
      const Candidate& cd = cands_[c];
      const double cont = cd.py * ((1.0 - cd.wg) * vd[cd.ig] + cd.wg * vd[cd.ig + 1]) +
                          cd.pz * ((1.0 - cd.wb) * vd[cd.ib] + cd.wb * vd[cd.ib + 1]);
      if (cd.reward + delta_ * cont >= best - kTieTol) {
        *best_index = c;
        break;
      }
    }
  }
  return best;
}

Eigen::ArrayXd BellmanOperator::apply(const Eigen::ArrayXd& v) const {
  const int n = grid_.size();
  Eigen::ArrayXd tv(n);
  for (int i = 0; i < n; ++i) tv[i] = point_value(i, v, nullptr);
  return tv;
}

void BellmanOperator::extract(const Eigen::ArrayXd& v, Eigen::ArrayXd& tv, Eigen::ArrayXd& policy,
                              std::vector<PolicyFlag>& flags) const {
  const int n = grid_.size();
  tv.resize(n);
  policy.resize(n);
  flags.assign(n, PolicyFlag::Exact);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    tv[i] = point_value(i, v, &best);
    policy[i] = cands_[best].q;
    flags[i] = cands_[best].eps_candidate ? PolicyFlag::EpsilonOptimal : PolicyFlag::Exact;
  }
}

SolverResult value_iterate(const ModelParams& m, PlannerKind kind, const SolverConfig& cfg) {
  m.validate();
  cfg.validate();
  const double tol = cfg.resolved_tol(m);

  SolverResult res;
  res.grid = BeliefGrid::uniform(cfg.grid_n);
  const BellmanOperator op(m, kind, res.grid, cfg.action_m, cfg.eps_pol);

  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(cfg.grid_n);
  res.sweep_residuals.reserve(64);
  for (int it = 0; it < cfg.max_iters; ++it) {
    Eigen::ArrayXd tv = op.apply(v);
    const double resid = (tv - v).abs().maxCoeff();
    res.sweep_residuals.push_back(resid);
    v = std::move(tv);
    if (resid < tol) {
      res.converged = true;
      break;
    }
  }
  res.iterations = static_cast<int>(res.sweep_residuals.size());
  res.residual = res.sweep_residuals.empty() ? 0.0 : res.sweep_residuals.back();
  op.extract(v, res.value, res.policy, res.flags);
  return res;
}

Eigen::ArrayXd value_iterate_restricted(const ModelParams& m, PlannerKind kind,
                                        const BeliefGrid& grid,
                                        const std::vector<ActionRule>& rules,
                                        int sweeps, double tol) {
  m.validate();
  const BellmanOperator op(m, kind, grid, rules);
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(grid.size());
  if (sweeps > 0) {
    for (int it = 0; it < sweeps; ++it) v = op.apply(v);
    return v;
  }
  const double stop = tol > 0.0 ? tol : 1e-9 * m.C / (1.0 - m.delta);
  for (int it = 0; it < 100000; ++it) {
    Eigen::ArrayXd tv = op.apply(v);
    const double resid = (tv - v).abs().maxCoeff();
    v = std::move(tv);
    if (resid < stop) break;
  }
  return v;
}

Eigen::ArrayXd evaluate_policy(const ModelParams& m, PlannerKind kind, const BeliefGrid& grid,
                               const Eigen::ArrayXd& policy, double tol) {
  m.validate();
  if (policy.size() != grid.size())
    throw std::invalid_argument("evaluate_policy: policy length must match the grid");
  const int n = grid.size();
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = std::clamp(policy[i], 0.5, 1.0);

  struct Row {
    double reward, py, pz, wg, wb;
    int ig, ib;
  };
  std::vector<Row> rows(n);
  for (int i = 0; i < n; ++i) {
    const double b = grid[i];
    Row r{reward(m, kind, b, q[i]), 0.0, 0.0, 0.0, 0.0, i < n - 1 ? i : n - 2, i < n - 1 ? i : n - 2};
    const double self_w = i < n - 1 ? 0.0 : 1.0;
    r.wg = self_w;
    r.wb = self_w;
    if (signal_informative(b, q[i])) {
      const double y = signal_prob_good(b, q[i]);
      const double z = signal_prob_bad(b, q[i]);
      if (y > 0.0) {
        const BeliefGrid::Cell cell = grid.locate(private_update(b, q[i], Signal::G));
        r.py = y;
        r.ig = cell.i;
        r.wg = cell.w;
      }
      if (z > 0.0) {
        const BeliefGrid::Cell cell = grid.locate(private_update(b, q[i], Signal::B));
        r.pz = z;
        r.ib = cell.i;
        r.wb = cell.w;
      }
    } else {
      r.py = 1.0;
      r.ig = i < n - 1 ? i : n - 2;
      r.wg = self_w;
    }
    rows[i] = r;
  }

  const double stop = tol > 0.0 ? tol : 1e-9 * m.C / (1.0 - m.delta);
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd tv(n);
  for (int it = 0; it < 100000; ++it) {
    const double* vd = v.data();
    for (int i = 0; i < n; ++i) {
      const Row& r = rows[i];
      const double cont = r.py * ((1.0 - r.wg) * vd[r.ig] + r.wg * vd[r.ig + 1]) +
                          r.pz * ((1.0 - r.wb) * vd[r.ib] + r.wb * vd[r.ib + 1]);
      tv[i] = r.reward + m.delta * cont;
    }
    const double resid = (tv - v).abs().maxCoeff();
    v.swap(tv);
    if (resid < stop) break;
  }
  return v;
}

namespace {

double oracle_rec(const ModelParams& m, PlannerKind kind, double b, int h,
                  const std::vector<ActionRule>& rules) {
  if (h == 0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const ActionRule& rule : rules) {
    const double q = rule.precision(m, b);
    double val = reward(m, kind, b, q);
    if (m.delta > 0.0) {
      if (signal_informative(b, q)) {
        const double y = signal_prob_good(b, q);
        const double z = signal_prob_bad(b, q);
        double cont = 0.0;
        if (y > 0.0) cont += y * oracle_rec(m, kind, private_update(b, q, Signal::G), h - 1, rules);
        if (z > 0.0) cont += z * oracle_rec(m, kind, private_update(b, q, Signal::B), h - 1, rules);
        val += m.delta * cont;
      } else {
        val += m.delta * oracle_rec(m, kind, b, h - 1, rules);
      }
    }
    best = std::max(best, val);
  }
  return best;
}

}  // namespace

double finite_horizon_oracle(const ModelParams& m, PlannerKind kind, double b0, int horizon,
                             const std::vector<ActionRule>& rules) {
  m.validate();
  if (horizon < 0 || horizon > 6)
    throw std::invalid_argument("finite_horizon_oracle: horizon must lie in [0,6]");
  if (rules.empty()) throw std::invalid_argument("finite_horizon_oracle: empty rule set");
  if (!(b0 >= 0.0 && b0 <= 1.0))
    throw std::invalid_argument("finite_horizon_oracle: b0 must lie in [0,1]");
  return oracle_rec(m, kind, b0, horizon, rules);
}

}  // namespace csl
