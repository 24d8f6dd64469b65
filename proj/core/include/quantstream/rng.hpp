#pragma once

#include <cstdint>
#include <random>

namespace quantstream {

// SplitMix64 finalizer. Bijective, so distinct inputs give distinct seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for substream `stream` of a master seed. Two rounds of mixing keep
// nearby (seed, stream) pairs statistically unrelated.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

// Independent engine for one substream. Replications, critical-value
// simulation, and auxiliary sampling each draw from their own stream, so
// results do not depend on scheduling or evaluation order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(seed, stream));
}

}  // namespace quantstream
