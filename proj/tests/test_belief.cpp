#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "csl/belief.hpp"

using namespace csl;

namespace {

const std::vector<double> kBeliefs = {0.0, 0.01, 0.1, 0.25, 0.3,  0.4,  0.5,
                                      0.6, 0.7,  0.75, 0.8, 0.99, 1.0};
const std::vector<double> kPrecisions = {0.5, 0.55, 0.6, 0.7, 0.75, 0.8, 0.9, 0.99, 1.0};

}  // namespace

TEST_CASE("signal probabilities form a distribution") {
  for (double b : kBeliefs) {
    for (double q : kPrecisions) {
      const double y = signal_prob_good(b, q);
      const double z = signal_prob_bad(b, q);
      CHECK(y == doctest::Approx(1.0 - z).epsilon(1e-15));
      CHECK(y >= -1e-15);
      CHECK(z >= -1e-15);
      // Relabeling the state mirrors the two signal probabilities.
      CHECK(y == doctest::Approx(signal_prob_bad(1.0 - b, q)).epsilon(1e-15));
    }
  }
  // P(s=G) = b q + (1-b)(1-q), by hand at b=0.3, q=0.8.
  CHECK(signal_prob_good(0.3, 0.8) == doctest::Approx(0.38).epsilon(1e-14));
  CHECK(signal_prob_bad(0.3, 0.8) == doctest::Approx(0.62).epsilon(1e-14));
}

TEST_CASE("private update matches Bayes on hand-computed points") {
  // b q / (b q + (1-b)(1-q)) and the mirrored form for a bad signal.
  CHECK(private_update(0.5, 0.8, Signal::G) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(private_update(0.8, 0.8, Signal::B) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(private_update(0.3, 0.8, Signal::G) == doctest::Approx(0.24 / 0.38).epsilon(1e-14));
  CHECK(private_update(0.3, 0.8, Signal::B) == doctest::Approx(0.06 / 0.62).epsilon(1e-14));
}

TEST_CASE("belief updates are a martingale under the signal distribution") {
  for (double b : kBeliefs) {
    for (double q : kPrecisions) {
      const double y = signal_prob_good(b, q);
      const double z = signal_prob_bad(b, q);
      if (y <= 0.0 || z <= 0.0) continue;  // conclusive corner, handled below
      const double up = private_update(b, q, Signal::G);
      const double dn = private_update(b, q, Signal::B);
      CHECK(y * up + z * dn == doctest::Approx(b).epsilon(1e-12));
      CHECK(up >= b - 1e-15);  // good news never lowers the belief
      CHECK(dn <= b + 1e-15);
    }
  }
}

TEST_CASE("uninformative and conclusive signals") {
  for (double b : kBeliefs) {
    CHECK(private_update(b, 0.5, Signal::G) == doctest::Approx(b).epsilon(1e-15));
    CHECK(private_update(b, 0.5, Signal::B) == doctest::Approx(b).epsilon(1e-15));
  }
  // q = 1 is conclusive wherever the observed signal has positive probability.
  CHECK(private_update(0.3, 1.0, Signal::G) == 1.0);
  CHECK(private_update(0.3, 1.0, Signal::B) == 0.0);
  CHECK(private_update(0.0, 1.0, Signal::B) == 0.0);
  CHECK(private_update(1.0, 1.0, Signal::G) == 1.0);
  // Degenerate priors stay degenerate under any non-conclusive signal.
  CHECK(private_update(0.0, 0.8, Signal::G) == 0.0);
  CHECK(private_update(1.0, 0.8, Signal::B) == 1.0);
  // Conditioning on an impossible signal is a domain error.
  CHECK_THROWS_AS(private_update(0.0, 1.0, Signal::G), std::domain_error);
  CHECK_THROWS_AS(private_update(1.0, 1.0, Signal::B), std::domain_error);
}

TEST_CASE("informativeness interval is closed at both ends") {
  // Exactly representable boundary pair: 1 - 0.75 = 0.25.
  CHECK(signal_informative(0.25, 0.75));
  CHECK(signal_informative(0.75, 0.75));
  CHECK(signal_informative(0.5, 0.75));
  CHECK_FALSE(signal_informative(0.2, 0.75));
  CHECK_FALSE(signal_informative(0.8, 0.75));
  CHECK(signal_informative(0.0, 1.0));
  CHECK(signal_informative(1.0, 1.0));
  CHECK_FALSE(signal_informative(0.4, 0.5));
  CHECK(signal_informative(0.5, 0.5));
}

TEST_CASE("cutoff action follows informative signals and the prior otherwise") {
  CHECK(agent_action(0.3, 0.8, Signal::G) == Action::G);
  CHECK(agent_action(0.3, 0.8, Signal::B) == Action::B);
  // Cascade regions ignore the signal entirely.
  CHECK(agent_action(0.9, 0.75, Signal::B) == Action::G);
  CHECK(agent_action(0.9, 0.75, Signal::G) == Action::G);
  CHECK(agent_action(0.1, 0.75, Signal::G) == Action::B);
  // At the boundary the posterior ties at 1/2 and resolves toward the signal.
  CHECK(private_update(0.25, 0.75, Signal::G) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(agent_action(0.25, 0.75, Signal::G) == Action::G);
  CHECK(agent_action(0.75, 0.75, Signal::B) == Action::B);
}

TEST_CASE("public update reveals signals only where actions respond to them") {
  for (double b : kBeliefs) {
    for (double q : kPrecisions) {
      if (b <= 0.0 || b >= 1.0) {
        CHECK(public_update(b, q, Action::G) == b);
        CHECK(public_update(b, q, Action::B) == b);
        continue;
      }
      if (signal_informative(b, q)) {
        if (signal_prob_good(b, q) > 0.0)
          CHECK(public_update(b, q, Action::G) == private_update(b, q, Signal::G));
        if (signal_prob_bad(b, q) > 0.0)
          CHECK(public_update(b, q, Action::B) == private_update(b, q, Signal::B));
      } else {
        CHECK(public_update(b, q, Action::G) == b);
        CHECK(public_update(b, q, Action::B) == b);
      }
    }
  }
}

TEST_CASE("mistake probability is min(b, 1-b, 1-q) and matches first principles") {
  CHECK(mistake_probability(0.3, 0.8) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(mistake_probability(0.5, 0.7) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(mistake_probability(0.05, 0.9) == doctest::Approx(0.05).epsilon(1e-15));
  for (double b : kBeliefs) {
    for (double q : kPrecisions) {
      // P(action != state): 1-q while the signal decides, else the prior mass
      // on the state the cascade ignores.
      const double direct =
          signal_informative(b, q) ? 1.0 - q : (b > q ? 1.0 - b : b);
      CHECK(mistake_probability(b, q) == doctest::Approx(direct).epsilon(1e-15));
    }
  }
}

TEST_CASE("action probability marginalizes the signal draw") {
  for (double b : kBeliefs) {
    for (double q : kPrecisions) {
      const double pg = action_prob_good(b, q);
      CHECK(pg >= 0.0);
      CHECK(pg <= 1.0);
      if (signal_informative(b, q))
        CHECK(pg == signal_prob_good(b, q));
      else
        CHECK(pg == (b > q ? 1.0 : 0.0));
    }
  }
}
