#pragma once

// Planner-side economics: the precision cost schedule, model parameters, and
// the one-step expected rewards of the two planner objectives.
//
// Costs are charged on the *offset* from the free baseline precision p:
//   altruistic planner pays beta(max(q - p, 0))   (only raising precision costs)
//   biased planner pays beta(|q - p|)             (moving in either direction costs)
// with beta increasing, concave, and beta(0) = 0.

#include <string>
#include <vector>

namespace csl {

// Increasing concave cost schedule over precision offsets in [0, 1/2].
// Either a linear rate k * offset or a piecewise-linear table validated at
// construction (anchored at (0,0), non-negative, non-decreasing, concave,
// covering offsets up to 1/2).
class CostSpec {
 public:
  static CostSpec linear(double k);
  static CostSpec tabulated(std::vector<std::pair<double, double>> points);

  double operator()(double offset) const;

  // Right derivative at offset 0 (the steepest slope anywhere, by concavity).
  double initial_slope() const noexcept;

  bool is_linear() const noexcept { return table_.empty(); }
  double linear_rate() const noexcept { return k_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

 private:
  CostSpec() = default;
  double k_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

enum class PlannerKind : unsigned char { Altruistic, Biased };

std::string to_string(PlannerKind kind);
PlannerKind planner_from_string(const std::string& name);

// Environment and planner parameters.  Validation rejects C <= 0,
// p outside [0.5,1], and any discount outside [0,1); an undiscounted-average
// objective (delta = 1) is out of scope and refused with an explanation.
struct ModelParams {
  double C = 1.0;       // per-agent cost of a mistaken action
  double p = 0.7;       // baseline precision available for free
  double delta = 0.0;   // planner discount factor, in [0,1)
  CostSpec cost = CostSpec::linear(0.5);

  void validate() const;  // throws std::invalid_argument
};

double cost_altruistic(const ModelParams& m, double q);
double cost_biased(const ModelParams& m, double q);

// r_A(b,q) = -cost_altruistic(q) - C * min(b, 1-b, 1-q).
double reward_altruistic(const ModelParams& m, double b, double q);

// Expected flow payoff of a planner that wants action G taken:
//   q >= max(b,1-b): -cost_biased(q) - C * z(b,q)   (action follows the signal)
//   b <  1-q       : -cost_biased(q) - C            (action B regardless)
//   b >  q         : -cost_biased(q)                (action G regardless)
// The boundary q = max(b,1-b) belongs to the signal-following branch.
double reward_biased(const ModelParams& m, double b, double q);

double reward(const ModelParams& m, PlannerKind kind, double b, double q);

}  // namespace csl
