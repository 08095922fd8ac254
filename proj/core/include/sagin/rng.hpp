#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sagin {

// Deterministic draw helpers on top of mt19937_64. The std:: distributions
// are implementation-defined, so seeded outputs would differ between
// standard libraries; these consume exactly one engine draw per sample,
// which also keeps generated structure identical when only a value range
// changes (the storage-demand sweep experiments rely on that).
inline int draw_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

// Uniform in [0, 1) with 53 random bits.
inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool draw_bernoulli(std::mt19937_64& rng, double p) {
  return draw_unit(rng) < p;
}

inline double draw_exponential(std::mt19937_64& rng, double mean) {
  return -mean * std::log1p(-draw_unit(rng));
}

}  // namespace sagin
