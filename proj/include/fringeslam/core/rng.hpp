#pragma once

#include <cstdint>
#include <random>

namespace fringeslam {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

// Independent deterministic stream per (seed, salt...) tuple. Noise is drawn
// from one stream per image row so parallel rendering stays reproducible.
template <typename... Salts>
std::mt19937_64 seeded_rng(std::uint64_t seed, Salts... salts) {
  std::uint64_t s = splitmix64(seed);
  ((s = mix_seed(s, static_cast<std::uint64_t>(salts))), ...);
  return std::mt19937_64(s);
}

}  // namespace fringeslam
