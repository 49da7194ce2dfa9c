// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/seed_stream.hpp"

#include <cmath>
#include <numbers>

namespace bmk {

std::vector<std::uint64_t> expand_seed(Seed seed, std::size_t count) {
  SeedStream stream(seed);
  std::vector<std::uint64_t> words;
  words.reserve(count);
  for (std::size_t i = 0; i < count; ++i) words.push_back(stream.next());
  return words;
}

Seed derive_seed(Seed seed, std::uint64_t tag) {
  Seed out;
  out.lo = fmix64(seed.lo ^ fmix64(tag + 0x5851F42D4C957F2Dull));
  out.hi = fmix64(seed.hi ^ fmix64(tag + 0x14057B7EF767814Full));
  return out;
}

double NormalSampler::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 = 1.0 - stream_.next_unit();
  const double u2 = stream_.next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace bmk
