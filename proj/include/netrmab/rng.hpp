#pragma once

#include <cstdint>
#include <random>

namespace netrmab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform in [0,1) keyed by (seed, stream, counter). Used for
/// arm transitions so every policy sees the same draws for the same
/// (seed, arm, t).
double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter);

/// Independent engine for a (seed, salt) pair.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t salt = 0);

/// 53-bit uniform in [0,1); unlike std::uniform_real_distribution the output
/// does not depend on the standard library.
double uniform01(std::mt19937_64& rng);

/// Uniform integer in [0, n). n must be positive.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

}  // namespace netrmab
