// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bmk {

/// Minimal arbitrary-precision unsigned integer, enough for exact binomial
/// sums up to M = 1024. Limbs are little-endian base 2^64.
class BigUint {
 public:
  BigUint() = default;
  explicit BigUint(std::uint64_t value);

  void add(const BigUint& other);
  void mul_small(std::uint64_t factor);
  /// Exact or truncating division by a small divisor; returns the remainder.
  std::uint64_t div_small(std::uint64_t divisor);

  bool is_zero() const { return limbs_.empty(); }
  std::size_t bit_length() const;
  /// Value as mantissa * 2^exponent with mantissa in [0.5, 1).
  double to_double_scaled(int* exponent) const;
  double to_double() const;
  std::string to_decimal_string() const;

  bool operator==(const BigUint&) const = default;

 private:
  std::vector<std::uint64_t> limbs_;  // no leading zero limbs
  void trim();
};

/// Binomial coefficient sum S = sum_{i=0}^{k} C(m, i), exact.
BigUint binomial_cumulative(unsigned m, unsigned k);

/// Closed-form estimate for masterkey search effort on M-bit templates.
///
/// p is the probability that a random template falls within Hamming distance
/// tau of a fixed one: p = 2^-M * sum_{i < tau} C(M, i), kept exact as
/// numerator / 2^M and converted to double afterwards. A single vector
/// epsilon-covering a database of n templates is expected after p^(-eps*n)
/// trials; a compliant set of n seeds is expected after n/p trials.
struct TrialEstimate {
  BigUint numerator;       // sum_{i < tau} C(M, i)
  unsigned denom_log2 = 0; // denominator is 2^M
  double p = 0.0;
  double log10_p = 0.0;
  double trials_scenario1 = 0.0;  // +inf when it exceeds 1e300; see log10 field
  double log10_trials_scenario1 = 0.0;
  double trials_scenario2 = 0.0;
  double log10_trials_scenario2 = 0.0;
};

/// Throws input_error unless 1 <= tau <= M. Non-integer tau counts all
/// distances i with i < tau, i.e. i <= ceil(tau) - 1.
TrialEstimate expected_trials(unsigned m, double tau, unsigned n, double epsilon);

}  // namespace bmk
