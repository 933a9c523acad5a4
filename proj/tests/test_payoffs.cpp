#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "csl/payoffs.hpp"

using namespace csl;

TEST_CASE("linear cost schedule") {
  const CostSpec c = CostSpec::linear(0.5);
  CHECK(c(0.0) == 0.0);
  CHECK(c(0.3) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(c(-0.2) == 0.0);  // offsets below zero are free
  CHECK(c.initial_slope() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.is_linear());
  CHECK_THROWS_AS(CostSpec::linear(-1.0), std::invalid_argument);
  CHECK(CostSpec::linear(0.0)(0.4) == 0.0);  // free precision is allowed
}

TEST_CASE("tabulated cost schedule interpolates and saturates") {
  const CostSpec c = CostSpec::tabulated({{0.0, 0.0}, {0.1, 0.2}, {0.5, 0.4}});
  CHECK_FALSE(c.is_linear());
  CHECK(c(0.0) == 0.0);
  CHECK(c(0.05) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c(0.1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(c(0.3) == doctest::Approx(0.3).epsilon(1e-14));  // 0.2 + 0.5*(0.4-0.2)
  CHECK(c(0.5) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(c(0.7) == doctest::Approx(0.4).epsilon(1e-14));  // saturates past the table
  CHECK(c(-0.1) == 0.0);
  CHECK(c.initial_slope() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("tabulated cost schedule validation") {
  using P = std::vector<std::pair<double, double>>;
  // Must be anchored at (0,0).
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.1, 0.0}, {0.5, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.1}, {0.5, 0.2}}), std::invalid_argument);
  // Needs at least two points.
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.0}}), std::invalid_argument);
  // Must cover offsets up to 1/2.
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.0}, {0.3, 0.1}}), std::invalid_argument);
  // Strictly increasing x.
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.0}, {0.2, 0.1}, {0.2, 0.2}, {0.5, 0.3}}),
                  std::invalid_argument);
  // Non-decreasing cost.
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.0}, {0.2, 0.2}, {0.5, 0.1}}),
                  std::invalid_argument);
  // Concavity: slopes must not increase.
  CHECK_THROWS_AS(CostSpec::tabulated(P{{0.0, 0.0}, {0.25, 0.1}, {0.5, 0.3}}),
                  std::invalid_argument);
  // A valid concave table with equal slopes (weakly concave) is accepted.
  CHECK_NOTHROW(CostSpec::tabulated(P{{0.0, 0.0}, {0.25, 0.1}, {0.5, 0.2}}));
}

TEST_CASE("model parameter validation") {
  ModelParams m;
  CHECK_NOTHROW(m.validate());
  ModelParams bad = m;
  bad.C = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = m;
  bad.p = 0.49;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = m;
  bad.p = 1.0;
  CHECK_NOTHROW(bad.validate());
  bad = m;
  bad.delta = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = m;
  bad.delta = 1.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  // delta = 1 is refused with a message naming the unsupported objective.
  bad = m;
  bad.delta = 1.0;
  try {
    bad.validate();
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("average-reward") != std::string::npos);
  }
}

TEST_CASE("planner spend differs between objectives") {
  ModelParams m;  // C=1, p=0.7, k=0.5
  // Altruistic: only raising precision costs.
  CHECK(cost_altruistic(m, 0.6) == 0.0);
  CHECK(cost_altruistic(m, 0.7) == 0.0);
  CHECK(cost_altruistic(m, 1.0) == doctest::Approx(0.15).epsilon(1e-15));
  // Biased: any move from baseline costs.
  CHECK(cost_biased(m, 0.5) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(cost_biased(m, 0.7) == 0.0);
  CHECK(cost_biased(m, 0.9) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("one-step rewards match hand-computed values") {
  ModelParams m;  // C=1, p=0.7, k=0.5
  // r_A = -beta(max(q-p,0)) - C*min(b,1-b,1-q).
  CHECK(reward_altruistic(m, 0.5, 1.0) == doctest::Approx(-0.15).epsilon(1e-14));
  CHECK(reward_altruistic(m, 0.5, 0.7) == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(reward_altruistic(m, 0.1, 0.7) == doctest::Approx(-0.1).epsilon(1e-14));
  // Signal-following branch: -beta(|q-p|) - C*z(b,q).
  CHECK(reward_biased(m, 0.3, 0.8) == doctest::Approx(-0.67).epsilon(1e-14));
  // Guaranteed-wrong branch (b < 1-q): -beta(|q-p|) - C.
  CHECK(reward_biased(m, 0.1, 0.8) == doctest::Approx(-1.05).epsilon(1e-14));
  // Guaranteed-favored branch (b > q): spend only.
  CHECK(reward_biased(m, 0.9, 0.8) == doctest::Approx(-0.05).epsilon(1e-14));
  // The boundary q = 1-b belongs to the signal-following branch:
  // z(0.2,0.8) = 0.68, spend 0.05 -> -0.73 rather than -1.05.
  CHECK(reward_biased(m, 0.2, 0.8) == doctest::Approx(-0.73).epsilon(1e-14));
  // q = b is also signal-following: z(0.8,0.8) = 0.32, spend 0.05 -> -0.37.
  CHECK(reward_biased(m, 0.8, 0.8) == doctest::Approx(-0.37).epsilon(1e-14));
}

TEST_CASE("reward dispatch and structural signs") {
  ModelParams m;
  CHECK(reward(m, PlannerKind::Altruistic, 0.4, 0.8) == reward_altruistic(m, 0.4, 0.8));
  CHECK(reward(m, PlannerKind::Biased, 0.4, 0.8) == reward_biased(m, 0.4, 0.8));
  for (double b : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    for (double q : {0.5, 0.6, 0.7, 0.85, 1.0}) {
      CHECK(reward_altruistic(m, b, q) <= 0.0);
      CHECK(reward_biased(m, b, q) <= 0.0);
      // The altruistic objective cannot tell the two states apart.
      CHECK(reward_altruistic(m, b, q) ==
            doctest::Approx(reward_altruistic(m, 1.0 - b, q)).epsilon(1e-14));
    }
  }
}

TEST_CASE("planner kind names round trip") {
  CHECK(planner_from_string("altruistic") == PlannerKind::Altruistic);
  CHECK(planner_from_string("biased") == PlannerKind::Biased);
  CHECK(to_string(PlannerKind::Altruistic) == "altruistic");
  CHECK(to_string(PlannerKind::Biased) == "biased");
  CHECK_THROWS_AS(planner_from_string("selfish"), std::invalid_argument);
}
