#include "csl/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "csl/belief.hpp"

namespace csl {

namespace {

// Bisection on [lo,hi] assuming f(lo) and f(hi) have opposite signs (either
// may be zero); returns the midpoint of the final bracket.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  const bool lo_neg = flo < 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == lo_neg)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Baseline: return "baseline";
    case PhaseLabel::Boundary: return "boundary";
    case PhaseLabel::Full: return "full";
    case PhaseLabel::EpsBelow: return "eps-below";
  }
  return "?";
}

MyopicAltruisticPolicy myopic_altruistic(const ModelParams& m) {
  m.validate();
  const double full_cost = m.cost(1.0 - m.p);
  MyopicAltruisticPolicy pol;
  pol.p = m.p;
  pol.t_m = full_cost < m.C * (1.0 - m.p) ? full_cost / m.C : 0.5;
  return pol;
}

PhaseLabel BiasedMyopicThresholds::classify(double b) const {
  if (b <= t1) return PhaseLabel::Baseline;
  if (b <= 1.0 - p) return PhaseLabel::Boundary;
  if (b < t2) return PhaseLabel::Baseline;
  if (b < t3) return PhaseLabel::Boundary;
  if (b <= t4) return PhaseLabel::Baseline;
  if (b < t5) return PhaseLabel::Full;
  if (b <= p) return PhaseLabel::EpsBelow;
  return PhaseLabel::Baseline;
}

double BiasedMyopicThresholds::precision_at(double b, double eps) const {
  switch (classify(b)) {
    case PhaseLabel::Baseline: return p;
    case PhaseLabel::Boundary: return std::max(b, 1.0 - b);
    case PhaseLabel::Full: return 1.0;
    case PhaseLabel::EpsBelow: return std::clamp(b - eps, 0.5, 1.0);
  }
  return p;
}

BiasedMyopicThresholds myopic_biased(const ModelParams& m, double root_tol) {
  m.validate();
  if (m.p >= 1.0)
    throw std::invalid_argument("myopic_biased: requires p < 1 (a free perfect signal degenerates the phase map)");
  if (!(root_tol > 0.0)) throw std::invalid_argument("myopic_biased: root_tol must be > 0");

  const double C = m.C;
  const double p = m.p;
  BiasedMyopicThresholds th;
  th.p = p;

  // t1: on [0, 1-p] the choice is between staying baseline (reward -C, the
  // cascade goes the wrong way) and buying informativeness q = 1-b, which
  // costs cost(1-b-p) and leaves mistake mass 1 - 2b(1-b).  The margin
  // cost(1-b-p) - 2Cb(1-b) falls strictly in b.
  const auto t1_margin = [&](double b) { return m.cost(1.0 - b - p) - 2.0 * C * b * (1.0 - b); };
  if (t1_margin(0.0) <= 0.0)
    th.t1 = 0.0;
  else
    th.t1 = bisect(t1_margin, 0.0, 1.0 - p, root_tol);

  // t2, t3: on [1-p, 1/2] boundary investment q = 1-b beats the (now free
  // and informative) baseline exactly where
  //   h(b) = C(p-1+b)(1-2b) - cost(p-1+b) > 0.
  // h vanishes at b = 1-p and is negative at 1/2, so the positive set is an
  // interior interval (possibly empty); locate it by a lattice sign scan and
  // sharpen both crossings by bisection.
  const auto h = [&](double b) {
    const double x = p - 1.0 + b;
    return C * x * (1.0 - 2.0 * b) - m.cost(x);
  };
  const double lo = 1.0 - p;
  th.t2 = lo;
  th.t3 = lo;
  if (lo < 0.5) {
    const int n_scan = 10000;
    const double step = (0.5 - lo) / n_scan;
    int first_pos = -1, last_pos = -1;
    for (int j = 1; j <= n_scan; ++j) {
      if (h(lo + j * step) > 0.0) {
        if (first_pos < 0) first_pos = j;
        last_pos = j;
      }
    }
    if (first_pos > 0) {
      // Right at 1-p the margin behaves like x*(C(2p-1) - cost'(0)); a
      // positive slope means the boundary phase starts at 1-p itself.
      if (first_pos == 1 && C * (2.0 * p - 1.0) - m.cost.initial_slope() >= 0.0)
        th.t2 = lo;
      else
        th.t2 = bisect(h, lo + (first_pos - 1) * step, lo + first_pos * step, root_tol);
      if (last_pos == n_scan)
        th.t3 = 0.5;
      else
        th.t3 = bisect(h, lo + last_pos * step, lo + (last_pos + 1) * step, root_tol);
    }
  }

  // t4: r(b,1) - r(b,p) = C(1-p)(2b-1) - cost(1-p) is linear in b; its root
  // marks where full precision overtakes the baseline.
  const double full_cost = m.cost(1.0 - p);
  const double cross = 0.5 + full_cost / (2.0 * C * (1.0 - p));

  // t5: just below the boundary the planner locks in action G at signal cost
  // only; that overtakes both baseline and full precision where
  //   u1(b) = Cz(b,p) - cost(p-b) > 0  and  u2(b) = C(1-b) + cost(1-p) - cost(p-b) > 0.
  // Both hold at b = p; scan down from p for the lower edge of the interval.
  const auto eps_margin = [&](double b) {
    const double c = m.cost(p - b);
    const double u1 = C * signal_prob_bad(b, p) - c;
    const double u2 = C * (1.0 - b) + full_cost - c;
    return std::min(u1, u2);
  };
  th.t4 = 0.5;
  th.t5 = 0.5;
  if (p > 0.5) {
    const int n_scan = 10000;
    const double step = (p - 0.5) / n_scan;
    int first_bad = -1;  // first scan point below p where the margin dies
    for (int j = 1; j <= n_scan; ++j) {
      if (eps_margin(p - j * step) <= 0.0) {
        first_bad = j;
        break;
      }
    }
    if (first_bad < 0)
      th.t5 = 0.5;
    else
      th.t5 = bisect(eps_margin, p - first_bad * step, p - (first_bad - 1) * step, root_tol);
    th.t4 = std::clamp(cross, 0.5, th.t5);
  }
  return th;
}

namespace {

void push_interval(PhaseReport& rep, const BeliefGrid& grid, PhaseLabel label, int lo, int hi) {
  if (hi < lo) return;
  rep.intervals.push_back({label, lo, hi, grid[lo], grid[hi]});
}

}  // namespace

PhaseReport fit_altruistic_structure(const BeliefGrid& grid, const Eigen::ArrayXd& policy,
                                     const ModelParams& m, double match_tol) {
  if (policy.size() != grid.size())
    throw std::invalid_argument("fit_altruistic_structure: policy length must match the grid");
  PhaseReport rep;
  rep.planner = PlannerKind::Altruistic;
  const int n = grid.size();
  const int mid = n / 2;

  bool ok = true;
  double maxdev = 0.0;

  // Mirror symmetry first; the fit itself works on the folded half [0, 1/2].
  double asym = 0.0;
  for (int i = 0; i < n; ++i) asym = std::max(asym, std::abs(policy[i] - policy[n - 1 - i]));
  if (asym > match_tol) {
    ok = false;
    rep.notes.push_back("policy is not mirror-symmetric (max gap " + std::to_string(asym) + ")");
  }

  // First departure from the baseline, then first arrival at full precision.
  int j_d = mid + 1;
  for (int i = 0; i <= mid; ++i) {
    if (std::abs(policy[i] - m.p) > match_tol) {
      j_d = i;
      break;
    }
  }
  int j_t = mid + 1;
  for (int i = j_d; i <= mid; ++i) {
    if (std::abs(policy[i] - 1.0) <= match_tol) {
      j_t = i;
      break;
    }
  }

  for (int i = 0; i <= mid; ++i) {
    double target;
    if (i < j_d)
      target = m.p;
    else if (i < j_t)
      target = std::max(grid[i], 1.0 - grid[i]);
    else
      target = 1.0;
    const double dev = std::abs(policy[i] - target);
    maxdev = std::max(maxdev, dev);
    if (dev > match_tol) ok = false;
  }

  const double h = grid.spacing();
  const double d_a = j_d <= mid ? grid[j_d] - 0.5 * h : 0.5;
  const double t_a = j_t <= mid ? grid[j_t] - 0.5 * h : 0.5;

  push_interval(rep, grid, PhaseLabel::Baseline, 0, j_d - 1);
  push_interval(rep, grid, PhaseLabel::Boundary, j_d, j_t - 1);
  push_interval(rep, grid, PhaseLabel::Full, j_t, n - 1 - j_t);
  push_interval(rep, grid, PhaseLabel::Boundary, n - j_t, n - 1 - j_d);
  push_interval(rep, grid, PhaseLabel::Baseline, n - j_d, n - 1);

  rep.thresholds["d_a"] = d_a;
  rep.thresholds["t_a"] = t_a;
  rep.thresholds["t_m"] = myopic_altruistic(m).t_m;
  rep.max_deviation = maxdev;
  rep.structure_ok = ok;
  return rep;
}

PhaseReport fit_biased_structure(const BeliefGrid& grid, const Eigen::ArrayXd& policy,
                                 const std::vector<PolicyFlag>& flags, const ModelParams& m,
                                 double match_tol) {
  if (policy.size() != grid.size() || flags.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("fit_biased_structure: policy/flags length must match the grid");
  PhaseReport rep;
  rep.planner = PlannerKind::Biased;
  const int n = grid.size();
  const double btol = 1e-9;  // belief-side tolerance when comparing b against p

  bool ok = true;
  double maxdev = 0.0;

  // Trailing region b > p: baseline exactly, never epsilon-flagged.
  for (int i = 0; i < n; ++i) {
    if (grid[i] <= m.p + btol) continue;
    maxdev = std::max(maxdev, std::abs(policy[i] - m.p));
    if (policy[i] != m.p || flags[i] == PolicyFlag::EpsilonOptimal) {
      ok = false;
      rep.notes.push_back("baseline violated at b=" + std::to_string(grid[i]));
      break;
    }
  }

  // Leading baseline run defines t1.
  int last_lead = -1;
  for (int i = 0; i < n && grid[i] < 1.0 - m.p && policy[i] == m.p; ++i) last_lead = i;
  const double t1 = last_lead >= 0 ? grid[last_lead] + 0.5 * grid.spacing() : 0.0;
  if (last_lead < 0) {
    ok = false;
    rep.notes.push_back("no leading baseline run");
  }

  // Epsilon-flagged points: one contiguous block ending at the last grid
  // point not above p.
  int first_eps = -1, last_eps = -1;
  bool contiguous = true;
  for (int i = 0; i < n; ++i) {
    if (flags[i] != PolicyFlag::EpsilonOptimal) continue;
    if (first_eps < 0)
      first_eps = i;
    else if (last_eps != i - 1)
      contiguous = false;
    last_eps = i;
  }
  int last_le_p = -1;
  for (int i = 0; i < n; ++i)
    if (grid[i] <= m.p + btol) last_le_p = i;
  if (first_eps < 0) {
    ok = false;
    rep.notes.push_back("no epsilon-optimal region");
  } else {
    if (!contiguous) {
      ok = false;
      rep.notes.push_back("epsilon-optimal region is not a single interval");
    }
    if (last_eps != last_le_p) {
      ok = false;
      rep.notes.push_back("epsilon-optimal region does not end at p");
    }
    if (grid[first_eps] <= 0.5) {
      ok = false;
      rep.notes.push_back("epsilon-optimal region extends to 1/2 or below");
    }
  }
  const double t2 = first_eps > 0 ? grid[first_eps] - 0.5 * grid.spacing()
                                  : (first_eps == 0 ? 0.0 : m.p);

  // Pointwise lower bounds by region.
  for (int i = last_lead + 1; i < n && grid[i] <= m.p + btol; ++i) {
    const double b = grid[i];
    double floor_q;
    if (b <= 1.0 - m.p + btol)
      floor_q = m.p;                       // at least baseline informativeness
    else if (b < 0.5)
      floor_q = 1.0 - b;                   // at least the boundary
    else if (flags[i] == PolicyFlag::Exact)
      floor_q = b;                         // exact points stay informative
    else
      continue;                            // epsilon points checked above
    const double gap = floor_q - policy[i];
    maxdev = std::max(maxdev, std::max(gap, 0.0));
    if (gap > match_tol) {
      ok = false;
      rep.notes.push_back("lower bound violated at b=" + std::to_string(b));
      break;
    }
  }

  push_interval(rep, grid, PhaseLabel::Baseline, 0, last_lead);
  if (first_eps >= 0) {
    push_interval(rep, grid, PhaseLabel::EpsBelow, first_eps, last_eps);
    if (last_eps + 1 <= n - 1) push_interval(rep, grid, PhaseLabel::Baseline, last_eps + 1, n - 1);
  }

  rep.thresholds["t1"] = t1;
  rep.thresholds["t2"] = t2;
  rep.max_deviation = maxdev;
  rep.structure_ok = ok;
  return rep;
}

std::pair<Eigen::ArrayXd, std::vector<PolicyFlag>> reconstruct_policy(
    const PhaseReport& report, const BeliefGrid& grid, const ModelParams& m, double eps_pol) {
  const int n = grid.size();
  Eigen::ArrayXd policy = Eigen::ArrayXd::Constant(n, m.p);
  std::vector<PolicyFlag> flags(n, PolicyFlag::Exact);
  for (const PhaseInterval& iv : report.intervals) {
    for (int i = std::max(iv.lo, 0); i <= std::min(iv.hi, n - 1); ++i) {
      const double b = grid[i];
      switch (iv.label) {
        case PhaseLabel::Baseline: policy[i] = m.p; break;
        case PhaseLabel::Boundary: policy[i] = std::max(b, 1.0 - b); break;
        case PhaseLabel::Full: policy[i] = 1.0; break;
        case PhaseLabel::EpsBelow:
          policy[i] = std::clamp(b - eps_pol, 0.5, 1.0);
          flags[i] = PolicyFlag::EpsilonOptimal;
          break;
      }
    }
  }
  return {std::move(policy), std::move(flags)};
}

}  // namespace csl
