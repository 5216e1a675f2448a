#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace synthctl {

/// Portable generator used everywhere randomness enters (simulation, bootstrap).
using Rng = boost::random::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Stream k of a run seeded with `seed` is mt19937_64 seeded with
/// splitmix64(seed ^ splitmix64(k)). Each bootstrap draw uses its own stream, so
/// results do not depend on evaluation order or worker count.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream)));
}

}  // namespace synthctl
