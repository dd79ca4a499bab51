#pragma once

// Deterministic seeding: every instance draws from its own stream, derived
// from (seed, tag, index), so results do not depend on evaluation order.

#include <cstdint>
#include <random>
#include <string_view>

namespace emt {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::mt19937_64 stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ fnv1a(tag)) + index));
}

}  // namespace emt
