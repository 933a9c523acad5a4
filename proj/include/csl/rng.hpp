#pragma once

// Counter-based uniform stream.  Every draw is a pure function of
// (seed, replication, agent, purpose), so replications can run in any order
// or in parallel and still reproduce bit-identical trajectories, and two
// runs that differ only in the agent model consume identical randomness.

#include <cstdint>

namespace csl {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class DrawPurpose : std::uint64_t { WorldState = 0, Signal = 1 };

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t replication,
                             std::uint64_t agent, DrawPurpose purpose) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ agent);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return h;
}

// Uniform draw in [0,1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t replication,
                        std::uint64_t agent, DrawPurpose purpose) noexcept {
  return static_cast<double>(mix_key(seed, replication, agent, purpose) >> 11) * 0x1.0p-53;
}

}  // namespace csl
