// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

#include "bmk/types.hpp"

namespace bmk {

// Deterministic seed expansion, scheme "smx64-bm-v1" (see docs/FORMATS.md).
//
// The 128-bit seed is split into two 64-bit lanes. Word k of the stream is
//
//   word(k) = fmix64(lo + (k+1) * G0) ^ fmix64(hi + (k+1) * G1)
//
// where fmix64 is the SplitMix64 finalizer and G0/G1 are fixed odd constants.
// The stream is counter-based: word(k) depends only on (seed, k), so any
// prefix can be regenerated or skipped without sequential state.

/// SplitMix64 avalanche finalizer.
constexpr std::uint64_t fmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Word stream over a 128-bit seed.
class SeedStream {
 public:
  explicit SeedStream(Seed seed) : seed_(seed) {}

  std::uint64_t next() {
    const std::uint64_t k1 = ++counter_;
    return fmix64(seed_.lo + k1 * 0x9E3779B97F4A7C15ull) ^
           fmix64(seed_.hi + k1 * 0xC2B2AE3D27D4EB4Full);
  }

  /// Uniform double in [0, 1) from the top 53 bits of the next word.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Next 128-bit value (two words, high first).
  Seed next_seed() {
    Seed s;
    s.hi = next();
    s.lo = next();
    return s;
  }

  std::uint64_t words_consumed() const { return counter_; }

 private:
  Seed seed_;
  std::uint64_t counter_ = 0;
};

/// First `count` words of the stream for `seed`.
std::vector<std::uint64_t> expand_seed(Seed seed, std::size_t count);

/// Independent sub-stream seed for (seed, tag); used for per-person candidate
/// streams, per-individual mutation streams, and degenerate-matrix retries.
Seed derive_seed(Seed seed, std::uint64_t tag);

/// Standard-normal draws via the Box-Muller transform over pairs of stream
/// words. Draws are produced in pairs; discard_pair() drops a cached second
/// value so the next draw starts a fresh pair.
class NormalSampler {
 public:
  explicit NormalSampler(SeedStream& stream) : stream_(stream) {}

  double next();
  void discard_pair() { has_cached_ = false; }

 private:
  SeedStream& stream_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace bmk
