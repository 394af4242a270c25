#include "netrmab/rng.hpp"

namespace netrmab {

double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (counter * 0xa0761d6478bd642fULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(mix64(mix64(seed) ^ salt));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace netrmab
