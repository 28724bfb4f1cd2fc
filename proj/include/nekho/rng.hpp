// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nekho {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent generator for (seed, module, index); the same triple always
/// yields the same sequence regardless of thread scheduling.
inline std::mt19937_64 stream(std::uint64_t seed, std::string_view module, std::uint64_t index) {
  std::uint64_t k = splitmix64(seed ^ fnv1a(module));
  k = splitmix64(k ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return std::mt19937_64(k);
}

/// Counter-based uniform in [0, 1) for (seed, i, j, salt); cheap enough for
/// per-entry randomness in large sparse operators.
inline double hash_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                           std::uint64_t salt = 0) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(salt + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ splitmix64(i));
  h = splitmix64(h ^ splitmix64(j + 0xd1b54a32d192ed03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace nekho
