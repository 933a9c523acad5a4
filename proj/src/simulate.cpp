#include "csl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "csl/rng.hpp"

namespace csl {

AgentModel AgentModel::parametric(double confirm, double contrary) {
  AgentModel a;
  a.kind = Kind::ParametricNonBayesian;
  a.lambda_confirm = confirm;
  a.lambda_contrary = contrary;
  a.validate();
  return a;
}

void AgentModel::validate() const {
  if (kind == Kind::Bayesian) return;
  if (!(lambda_confirm > 0.0 && lambda_confirm <= 1.0))
    throw std::invalid_argument("AgentModel: lambda_confirm must lie in (0,1]");
  if (!(lambda_contrary >= 1.0))
    throw std::invalid_argument("AgentModel: lambda_contrary must be >= 1");
}

void SimulationConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("SimulationConfig: horizon must be >= 1");
  if (replications < 1) throw std::invalid_argument("SimulationConfig: replications must be >= 1");
  if (!(prior >= 0.0 && prior <= 1.0))
    throw std::invalid_argument("SimulationConfig: prior must lie in [0,1]");
}

double nonbayesian_update(const AgentModel& agent, double b, double q, Signal s) {
  if (b <= 0.0 || b >= 1.0) return clamp01(b);
  if (q >= 1.0) return s == Signal::G ? 1.0 : 0.0;
  const double shift = std::log(q / (1.0 - q));  // 0 at q = 1/2
  const double d = s == Signal::G ? shift : -shift;
  const double L = std::log(b / (1.0 - b));
  double lambda = 1.0;
  if (L != 0.0) lambda = (L > 0.0) == (d > 0.0) ? agent.lambda_confirm : agent.lambda_contrary;
  const double Lp = L + lambda * d;
  return 1.0 / (1.0 + std::exp(-Lp));
}

double agent_posterior(const AgentModel& agent, double b, double q, Signal s) {
  if (agent.kind == AgentModel::Kind::Bayesian) {
    if (b <= 0.0 || b >= 1.0) return clamp01(b);
    if (q >= 1.0) return s == Signal::G ? 1.0 : 0.0;
    return private_update(b, q, s);
  }
  return nonbayesian_update(agent, b, q, s);
}

PolicyFn constant_policy(double q) {
  const double qq = std::clamp(q, 0.5, 1.0);
  return [qq](double) { return qq; };
}

PolicyFn grid_policy(BeliefGrid grid, Eigen::ArrayXd policy) {
  if (policy.size() != grid.size())
    throw std::invalid_argument("grid_policy: policy length must match the grid");
  return [grid = std::move(grid), policy = std::move(policy)](double b) {
    return std::clamp(grid.interpolate(policy, b), 0.5, 1.0);
  };
}

namespace {

Action threshold_action(double posterior, Signal s) {
  if (posterior > 0.5) return Action::G;
  if (posterior < 0.5) return Action::B;
  return as_action(s);
}

WorldState draw_world(const SimulationConfig& cfg, int replication) {
  switch (cfg.world) {
    case WorldDraw::FixedG: return WorldState::G;
    case WorldDraw::FixedB: return WorldState::B;
    case WorldDraw::FromPrior: break;
  }
  const double u = uniform01(cfg.seed, replication, 0, DrawPurpose::WorldState);
  return u < cfg.prior ? WorldState::G : WorldState::B;
}

}  // namespace

Trajectory simulate_trajectory(const ModelParams& m, PlannerKind kind, const PolicyFn& policy,
                               const AgentModel& agent, const SimulationConfig& cfg,
                               int replication) {
  m.validate();
  agent.validate();
  cfg.validate();

  Trajectory traj;
  traj.world = draw_world(cfg, replication);
  traj.agent = agent;
  traj.steps.reserve(cfg.horizon);

  double b = clamp01(cfg.prior);
  for (int i = 1; i <= cfg.horizon; ++i) {
    const double q = std::clamp(policy(b), 0.5, 1.0);
    const double u = uniform01(cfg.seed, replication, i, DrawPurpose::Signal);
    const Signal truth = as_signal(traj.world);
    const Signal s = u < q ? truth : flip(truth);

    TrajectoryStep step;
    step.index = i;
    step.public_belief = b;
    step.precision = q;
    step.signal = s;

    if (b <= 0.0 || b >= 1.0) {
      // Degenerate public belief: the agent is certain regardless of model.
      step.private_belief = b;
      step.action = b >= 1.0 ? Action::G : Action::B;
      step.responsive = false;
    } else {
      step.private_belief = agent_posterior(agent, b, q, s);
      step.action = threshold_action(step.private_belief, s);
      const Signal other = flip(s);
      const Action alt = threshold_action(agent_posterior(agent, b, q, other), other);
      step.responsive = alt != step.action;
    }

    step.correct = matches(step.action, traj.world);
    const double spend =
        kind == PlannerKind::Altruistic ? cost_altruistic(m, q) : cost_biased(m, q);
    if (kind == PlannerKind::Altruistic)
      step.reward = -spend - (step.correct ? 0.0 : m.C);
    else
      step.reward = -spend - (step.action == Action::B ? m.C : 0.0);

    if (step.responsive) {
      // The action pins down the signal, so the observer conditions on it.
      b = private_update(b, q, as_signal(step.action));
    }
    traj.steps.push_back(step);
  }
  return traj;
}

CascadeInfo detect_cascade(const Trajectory& t) {
  CascadeInfo info;
  for (const TrajectoryStep& step : t.steps) {
    if (step.responsive && step.public_belief > 0.0 && step.public_belief < 1.0) continue;
    info.entered = true;
    info.entry_index = step.index;
    if (step.public_belief >= 1.0)
      info.direction = Action::G;
    else if (step.public_belief <= 0.0)
      info.direction = Action::B;
    else
      info.direction = step.action;
    break;
  }
  return info;
}

namespace {

struct RepOutcome {
  double welfare, payoff, expenditure;
  bool cascaded;
  int entry;
  Action direction;
};

RepOutcome run_replication(const ModelParams& m, PlannerKind kind, const PolicyFn& policy,
                           const AgentModel& agent, const SimulationConfig& cfg, int rep) {
  const Trajectory traj = simulate_trajectory(m, kind, policy, agent, cfg, rep);
  RepOutcome out{0.0, 0.0, 0.0, false, 0, Action::G};
  double df = 1.0;
  for (const TrajectoryStep& step : traj.steps) {
    out.welfare += df * (step.correct ? 0.0 : -m.C);
    out.payoff += df * step.reward;
    const double spend =
        kind == PlannerKind::Altruistic ? cost_altruistic(m, step.precision)
                                        : cost_biased(m, step.precision);
    out.expenditure += df * spend;
    df *= m.delta;
  }
  const CascadeInfo casc = detect_cascade(traj);
  out.cascaded = casc.entered;
  out.entry = casc.entry_index;
  out.direction = casc.direction;
  return out;
}

void mean_se(const std::vector<RepOutcome>& reps, double RepOutcome::*field, double& mean,
             double& se) {
  const std::size_t n = reps.size();
  double sum = 0.0;
  for (const RepOutcome& r : reps) sum += r.*field;
  mean = sum / static_cast<double>(n);
  if (n < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (const RepOutcome& r : reps) {
    const double d = r.*field - mean;
    ss += d * d;
  }
  se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

WelfareReport estimate_welfare(const ModelParams& m, PlannerKind kind, const PolicyFn& policy,
                               const AgentModel& agent, const SimulationConfig& cfg, int jobs) {
  m.validate();
  agent.validate();
  cfg.validate();

  const int R = cfg.replications;
  std::vector<RepOutcome> reps(R);
  const int workers = std::max(1, std::min(jobs, R));
  if (workers == 1) {
    for (int r = 0; r < R; ++r) reps[r] = run_replication(m, kind, policy, agent, cfg, r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int r = w; r < R; r += workers)
          reps[r] = run_replication(m, kind, policy, agent, cfg, r);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  WelfareReport rep;
  rep.replications = R;
  rep.horizon = cfg.horizon;
  rep.delta = m.delta;
  mean_se(reps, &RepOutcome::welfare, rep.welfare_mean, rep.welfare_se);
  mean_se(reps, &RepOutcome::payoff, rep.payoff_mean, rep.payoff_se);
  mean_se(reps, &RepOutcome::expenditure, rep.expenditure_mean, rep.expenditure_se);

  int entered = 0;
  double entry_sum = 0.0;
  for (const RepOutcome& r : reps) {
    if (!r.cascaded) continue;
    ++entered;
    entry_sum += r.entry;
    if (r.direction == Action::G)
      ++rep.direction_g;
    else
      ++rep.direction_b;
  }
  rep.cascade_fraction = static_cast<double>(entered) / static_cast<double>(R);
  rep.cascade_mean_entry = entered > 0 ? entry_sum / entered : 0.0;
  rep.truncation_bound =
      m.delta > 0.0 ? std::pow(m.delta, cfg.horizon) * m.C / (1.0 - m.delta) : 0.0;
  return rep;
}

}  // namespace csl
