#pragma once

#include <cstdint>

namespace coda {

// Counter-based random draws: every value is a pure function of
// (seed, counter words), so bootstrap replicates can be generated in any
// order -- or in parallel -- and still be bit-identical run to run.
// Mixing function is splitmix64 (Steele, Lea & Flood 2014).
struct CounterRng {
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Key for the substream identified by up to four counter words.
  static std::uint64_t key(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0,
                           std::uint64_t d = 0) {
    std::uint64_t k = mix(seed);
    k = mix(k ^ a);
    k = mix(k ^ b);
    k = mix(k ^ c);
    k = mix(k ^ d);
    return k;
  }

  // Uniform on [0, 1) with 53 random bits.
  static double uniform01(std::uint64_t k) {
    return static_cast<double>(mix(k) >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, m) via multiply-shift (m up to 2^32 is plenty here;
  // bias is O(m / 2^64)).
  static std::size_t uniform_index(std::uint64_t k, std::size_t m) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(mix(k)) * static_cast<unsigned __int128>(m);
    return static_cast<std::size_t>(prod >> 64);
  }

  // Standard normal via Box-Muller on two decorrelated halves of the key.
  static double normal(std::uint64_t k);
};

}  // namespace coda
