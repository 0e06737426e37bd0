#pragma once

#include <cstdint>
#include <random>

namespace stkrr {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` derived from `base_seed`: element `index` of the
/// SplitMix64 sequence started at `base_seed`. This rule is part of the
/// reproducibility contract and must not change.
constexpr std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(base_seed + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace stkrr
