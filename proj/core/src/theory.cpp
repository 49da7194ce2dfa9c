// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "bmk/errors.hpp"

namespace bmk {

BigUint::BigUint(std::uint64_t value) {
  if (value != 0) limbs_.push_back(value);
}

void BigUint::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

void BigUint::add(const BigUint& other) {
  if (limbs_.size() < other.limbs_.size()) limbs_.resize(other.limbs_.size(), 0);
  unsigned __int128 carry = 0;
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    unsigned __int128 sum = carry + limbs_[i];
    if (i < other.limbs_.size()) sum += other.limbs_[i];
    limbs_[i] = static_cast<std::uint64_t>(sum);
    carry = sum >> 64;
  }
  if (carry != 0) limbs_.push_back(static_cast<std::uint64_t>(carry));
}

void BigUint::mul_small(std::uint64_t factor) {
  if (factor == 0) {
    limbs_.clear();
    return;
  }
  unsigned __int128 carry = 0;
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    unsigned __int128 prod = static_cast<unsigned __int128>(limbs_[i]) * factor + carry;
    limbs_[i] = static_cast<std::uint64_t>(prod);
    carry = prod >> 64;
  }
  while (carry != 0) {
    limbs_.push_back(static_cast<std::uint64_t>(carry));
    carry >>= 64;
  }
}

std::uint64_t BigUint::div_small(std::uint64_t divisor) {
  if (divisor == 0) throw input_error("division by zero");
  unsigned __int128 remainder = 0;
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    unsigned __int128 cur = (remainder << 64) | limbs_[i];
    limbs_[i] = static_cast<std::uint64_t>(cur / divisor);
    remainder = cur % divisor;
  }
  trim();
  return static_cast<std::uint64_t>(remainder);
}

std::size_t BigUint::bit_length() const {
  if (limbs_.empty()) return 0;
  const std::uint64_t top = limbs_.back();
  std::size_t bits = (limbs_.size() - 1) * 64;
  return bits + (64 - static_cast<std::size_t>(std::countl_zero(top)));
}

double BigUint::to_double_scaled(int* exponent) const {
  if (limbs_.empty()) {
    *exponent = 0;
    return 0.0;
  }
  // The top two limbs carry more precision than a double mantissa holds.
  const std::size_t n = limbs_.size();
  long double mantissa = static_cast<long double>(limbs_[n - 1]);
  if (n >= 2) mantissa += static_cast<long double>(limbs_[n - 2]) * 0x1.0p-64l;
  int top_exp = 0;
  const long double frac = std::frexp(mantissa, &top_exp);
  *exponent = top_exp + static_cast<int>((n - 1) * 64);
  return static_cast<double>(frac);
}

double BigUint::to_double() const {
  int exp = 0;
  const double frac = to_double_scaled(&exp);
  return std::ldexp(frac, exp);
}

std::string BigUint::to_decimal_string() const {
  if (limbs_.empty()) return "0";
  BigUint tmp = *this;
  std::string digits;
  while (!tmp.is_zero()) {
    const std::uint64_t rem = tmp.div_small(10);
    digits.push_back(static_cast<char>('0' + rem));
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

BigUint binomial_cumulative(unsigned m, unsigned k) {
  // C(m, i+1) = C(m, i) * (m - i) / (i + 1), exact at every step.
  BigUint coeff(1);
  BigUint sum(1);  // i = 0 term
  const unsigned top = std::min(k, m);
  for (unsigned i = 0; i < top; ++i) {
    coeff.mul_small(m - i);
    coeff.div_small(i + 1);
    sum.add(coeff);
  }
  return sum;
}

TrialEstimate expected_trials(unsigned m, double tau, unsigned n, double epsilon) {
  if (!(tau >= 1.0) || !(tau <= static_cast<double>(m)))
    throw input_error("threshold must satisfy 1 <= tau <= M");
  // Distances strictly under tau: i <= ceil(tau) - 1.
  const unsigned max_i = static_cast<unsigned>(std::ceil(tau)) - 1;

  TrialEstimate est;
  est.numerator = binomial_cumulative(m, max_i);
  est.denom_log2 = m;

  int exp = 0;
  const double frac = est.numerator.to_double_scaled(&exp);
  est.p = std::ldexp(frac, exp - static_cast<int>(m));
  est.log10_p = std::log10(frac) + (exp - static_cast<double>(m)) * std::log10(2.0);

  est.log10_trials_scenario1 = -epsilon * static_cast<double>(n) * est.log10_p;
  est.trials_scenario1 = est.log10_trials_scenario1 > 300.0
                             ? std::numeric_limits<double>::infinity()
                             : std::pow(10.0, est.log10_trials_scenario1);
  est.log10_trials_scenario2 = std::log10(static_cast<double>(n)) - est.log10_p;
  est.trials_scenario2 = est.log10_trials_scenario2 > 300.0
                             ? std::numeric_limits<double>::infinity()
                             : static_cast<double>(n) / est.p;
  return est;
}

}  // namespace bmk
