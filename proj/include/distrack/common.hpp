#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace distrack {

using ElementId = std::uint64_t;
using SiteId = std::uint32_t;

/// Marks messages sent by the coordinator.
inline constexpr SiteId kCoordinator = 0xffffffffu;

using Rng = std::mt19937_64;

/// Uniform double strictly inside (0,1). Built from the top 53 bits so the
/// sequence is identical across standard libraries.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// splitmix64 finalizer, used to derive independent seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace distrack
