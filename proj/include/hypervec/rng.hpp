#pragma once

// Deterministic randomness helpers. All draws go through std::mt19937_64
// (whose output sequence is fixed by the standard) plus hand-rolled bounded
// sampling, so identical seeds give identical bits on every platform.

#include <cstdint>
#include <random>

namespace hypervec {

// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives the seed of a named substream (codebook, tiebreak, subsampling...)
// from a user-facing seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ splitmix64(tag));
}

/// Seeded generator with portable primitives.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Low 32 bits of one engine draw.
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_()); }

  // Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t min = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t r = engine_();
    while (r < min) r = engine_();
    return r % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hypervec
