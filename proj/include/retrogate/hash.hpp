#pragma once

#include <cstdint>
#include <string_view>

namespace retrogate {

// Platform-independent 64-bit hashing. std::hash is not stable across
// standard libraries, and fingerprints/index headers are persisted.

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ (mix64(value) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Bounded draw from a 64-bit engine. std::uniform_int_distribution is
/// implementation-defined, which would break seeded determinism across
/// toolchains.
template <class Engine> std::uint64_t draw_below(Engine &rng, std::uint64_t n) {
  return n == 0 ? 0 : static_cast<std::uint64_t>(rng()) % n;
}

template <class Engine> double draw_unit(Engine &rng) {
  return static_cast<double>(static_cast<std::uint64_t>(rng()) >> 11) * 0x1.0p-53;
}

} // namespace retrogate
