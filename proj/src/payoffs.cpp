#include "csl/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csl/belief.hpp"

namespace csl {

CostSpec CostSpec::linear(double k) {
  if (!(k >= 0.0) || !std::isfinite(k))
    throw std::invalid_argument("CostSpec::linear: rate must be finite and >= 0");
  CostSpec c;
  c.k_ = k;
  return c;
}

CostSpec CostSpec::tabulated(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("CostSpec::tabulated: need at least two points");
  if (points.front().first != 0.0 || points.front().second != 0.0)
    throw std::invalid_argument("CostSpec::tabulated: table must be anchored at (0,0)");
  if (points.back().first < 0.5)
    throw std::invalid_argument("CostSpec::tabulated: table must cover offsets up to 0.5");
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& [x0, c0] = points[i - 1];
    const auto& [x1, c1] = points[i];
    if (!std::isfinite(x1) || !std::isfinite(c1))
      throw std::invalid_argument("CostSpec::tabulated: non-finite entry");
    if (x1 <= x0) throw std::invalid_argument("CostSpec::tabulated: offsets must be strictly increasing");
    if (c1 < c0) throw std::invalid_argument("CostSpec::tabulated: cost must be non-decreasing");
    const double slope = (c1 - c0) / (x1 - x0);
    if (slope > prev_slope + 1e-12)
      throw std::invalid_argument("CostSpec::tabulated: cost must be concave (non-increasing slopes)");
    prev_slope = slope;
  }
  CostSpec c;
  c.table_ = std::move(points);
  return c;
}

double CostSpec::operator()(double offset) const {
  offset = std::max(offset, 0.0);
  if (table_.empty()) return k_ * offset;
  if (offset >= table_.back().first) return table_.back().second;
  auto it = std::upper_bound(table_.begin(), table_.end(), offset,
                             [](double v, const auto& pt) { return v < pt.first; });
  const auto& [x1, c1] = *it;
  const auto& [x0, c0] = *(it - 1);
  const double w = (offset - x0) / (x1 - x0);
  return c0 + w * (c1 - c0);
}

double CostSpec::initial_slope() const noexcept {
  if (table_.empty()) return k_;
  return (table_[1].second - table_[0].second) / (table_[1].first - table_[0].first);
}

std::string to_string(PlannerKind kind) {
  return kind == PlannerKind::Altruistic ? "altruistic" : "biased";
}

PlannerKind planner_from_string(const std::string& name) {
  if (name == "altruistic") return PlannerKind::Altruistic;
  if (name == "biased") return PlannerKind::Biased;
  throw std::invalid_argument("unknown planner '" + name + "' (expected altruistic|biased)");
}

void ModelParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("ModelParams: C must be finite and > 0");
  if (!(p >= 0.5 && p <= 1.0)) throw std::invalid_argument("ModelParams: p must lie in [0.5,1]");
  if (delta == 1.0)
    throw std::invalid_argument(
        "ModelParams: delta = 1 is rejected; the discounted objective diverges "
        "and an average-reward criterion is not supported");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("ModelParams: delta must lie in [0,1)");
}

double cost_altruistic(const ModelParams& m, double q) { return m.cost(std::max(q - m.p, 0.0)); }

double cost_biased(const ModelParams& m, double q) { return m.cost(std::abs(q - m.p)); }

double reward_altruistic(const ModelParams& m, double b, double q) {
  return -cost_altruistic(m, q) - m.C * mistake_probability(b, q);
}

double reward_biased(const ModelParams& m, double b, double q) {
  const double c = cost_biased(m, q);
  if (signal_informative(b, q)) return -c - m.C * signal_prob_bad(b, q);
  if (b < 0.5) return -c - m.C;
  return -c;
}

double reward(const ModelParams& m, PlannerKind kind, double b, double q) {
  return kind == PlannerKind::Altruistic ? reward_altruistic(m, b, q) : reward_biased(m, b, q);
}

}  // namespace csl
