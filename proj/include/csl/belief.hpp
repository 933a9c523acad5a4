#pragma once

// Core binary-state observational learning rules: signal likelihoods, Bayesian
// belief updates, the cutoff action rule, and the public-belief transition that
// treats an observed action as a revealed signal whenever the signal can move
// the action.
//
// Conventions used throughout:
//   b : public belief P(state = G), in [0,1]
//   q : signal precision P(signal = state), in [0.5,1]
//   y(b,q) = P(next signal = G) = 1 + 2bq - b - q
//   z(b,q) = P(next signal = B) = b + q - 2bq,  y + z = 1
// A signal is decision-relevant exactly when 1-q <= b <= q (closed interval;
// an indifferent agent follows its signal).

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csl {

enum class WorldState : unsigned char { G, B };
enum class Signal : unsigned char { G, B };
enum class Action : unsigned char { G, B };

constexpr WorldState flip(WorldState w) noexcept {
  return w == WorldState::G ? WorldState::B : WorldState::G;
}
constexpr Signal flip(Signal s) noexcept {
  return s == Signal::G ? Signal::B : Signal::G;
}
constexpr Action flip(Action a) noexcept {
  return a == Action::G ? Action::B : Action::G;
}

// Actions and signals share the {G,B} carrier; these casts make the
// "action read as signal" and "action matches state" conversions explicit.
constexpr Signal as_signal(Action a) noexcept {
  return a == Action::G ? Signal::G : Signal::B;
}
constexpr Action as_action(Signal s) noexcept {
  return s == Signal::G ? Action::G : Action::B;
}
constexpr Signal as_signal(WorldState w) noexcept {
  return w == WorldState::G ? Signal::G : Signal::B;
}
constexpr bool matches(Action a, WorldState w) noexcept {
  return (a == Action::G) == (w == WorldState::G);
}

using Belief = double;     // P(state = G), valid range [0,1]
using Precision = double;  // P(signal = state), valid range [0.5,1]

inline double clamp01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

// P(next signal = G | b, q).
inline double signal_prob_good(double b, double q) noexcept {
  return 1.0 + 2.0 * b * q - b - q;
}

// P(next signal = B | b, q).
inline double signal_prob_bad(double b, double q) noexcept {
  return b + q - 2.0 * b * q;
}

// True when a single signal can change the cutoff action below, i.e. on the
// closed interval 1-q <= b <= q.  Evaluated as q >= max(b, 1-b): rewards,
// dynamic programming, and belief transitions must branch identically, and
// this form classifies representable knife-edge pairs such as (0.3, 0.7) as
// the ties they represent (1 - 0.3 rounds onto 0.7; 1 - 0.7 rounds off 0.3).
inline bool signal_informative(double b, double q) noexcept {
  return q >= std::max(b, 1.0 - b);
}

// Posterior after privately observing one signal of precision q.
// Throws when the conditioning event has probability zero, which happens
// only at the corners (b,q) = (0,1) with s = G and (1,1) with s = B.
// The likelihoods are kept in product form so conclusive signals (q = 1)
// land on exactly 0 or 1 and the no-information signal (q = 1/2) is a no-op
// up to one rounding step.
inline double private_update(double b, double q, Signal s) {
  const double num = s == Signal::G ? b * q : b * (1.0 - q);
  const double denom =
      s == Signal::G ? b * q + (1.0 - b) * (1.0 - q) : b * (1.0 - q) + (1.0 - b) * q;
  if (denom <= 0.0) throw std::domain_error("private_update: conditioning on a zero-probability signal");
  return clamp01(num / denom);
}

// Cutoff rule: follow the signal when it is decision-relevant, otherwise
// follow the prior.  Ties (posterior exactly 1/2) resolve toward the signal.
inline Action agent_action(double b, double q, Signal s) noexcept {
  if (signal_informative(b, q)) return as_action(s);
  return b > q ? Action::G : Action::B;
}

// Public belief after observing an action.  Where actions reveal signals the
// observer conditions on the action as if it were the signal; elsewhere the
// action carries no information and the belief is unchanged.  0 and 1 are
// absorbing: no action moves a degenerate belief.
inline double public_update(double b, double q, Action a) {
  if (b <= 0.0 || b >= 1.0) return clamp01(b);
  if (!signal_informative(b, q)) return b;
  return private_update(b, q, as_signal(a));
}

// Probability the acting agent mismatches the state: min(b, 1-b, 1-q).
inline double mistake_probability(double b, double q) noexcept {
  return std::min({b, 1.0 - b, 1.0 - q});
}

// P(action = G | b, q) before the signal realizes.
inline double action_prob_good(double b, double q) noexcept {
  if (signal_informative(b, q)) return signal_prob_good(b, q);
  return b > q ? 1.0 : 0.0;
}

}  // namespace csl
