// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmk/ga_masterkey.hpp"
#include "bmk/transform.hpp"
#include "bmk/types.hpp"

namespace bmk {

/// Limits and parameters of the per-person brute-force seed search. At least
/// one of c_max / time_budget_ms must be set and tau_b must be positive.
struct SeedSearchConfig {
  std::optional<std::uint64_t> c_max;
  std::optional<double> time_budget_ms;
  double tau_b = 0.0;
  TransformConfig transform;
  Seed rng_seed;
  unsigned threads = 0;
};

enum class SeedOutcomeStatus { Found, Fallback, Failure };

/// Outcome of one person's search. Found seeds verify every masterkey,
/// re-checkable from scratch. Fallback (multi-masterkey mode only) carries the
/// candidate minimizing the worst masterkey distance. Trial counts under a
/// c_max limit are deterministic; under a wall-clock budget only Found
/// outcomes are (the stop point of an exhausted search depends on the clock).
struct SeedOutcome {
  SeedOutcomeStatus status = SeedOutcomeStatus::Failure;
  Seed seed;
  std::uint64_t trials = 0;
  double elapsed_ms = 0.0;
  double worst_distance = 0.0;  // max over masterkeys, for Found/Fallback
};

/// Draws candidate seeds from the deterministic stream of cfg.rng_seed and
/// accepts the first one under which every masterkey verifies against the
/// target's template. All templates are recomputed per candidate seed.
SeedOutcome find_seed(std::span<const FeatureVector> masterkeys,
                      const FeatureVector& target, const SeedSearchConfig& cfg);

struct PersonOutcome {
  std::string person_id;
  SeedOutcome outcome;
};

struct SeedSearchResult {
  std::vector<PersonOutcome> outcomes;
  double success_fraction = 0.0;  // Found / searched
  double mean_trials = 0.0;
  std::uint64_t max_trials = 0;
  std::uint64_t total_trials = 0;
  double total_elapsed_ms = 0.0;
};

/// Runs find_seed independently for every person (minus the excluded one)
/// against its sample_index-th feature vector, with per-person candidate
/// streams derived from (cfg.rng_seed, person index). Found and Fallback
/// seeds are enrolled; Failure persons are reported and omitted. Results are
/// identical to a sequential run for any thread count.
struct CompliantBuild {
  CancelableDatabase db;
  SeedSearchResult result;
};
CompliantBuild build_compliant_database(std::span<const FeatureVector> masterkeys,
                                        const FeatureDatabase& features,
                                        std::size_t sample_index,
                                        std::optional<std::size_t> exclude_person,
                                        const SeedSearchConfig& cfg);

/// Match counts of first-set (enrollment-time) and second-set (held-out)
/// vectors against a compliant database, with the cumulative decreasing curve
/// curve[k] = fraction of the set matching at least k entries, k = 0..n.
struct SecondSetReport {
  std::vector<std::size_t> first_counts;
  std::vector<std::size_t> second_counts;
  std::vector<double> first_curve;
  std::vector<double> second_curve;
};
SecondSetReport second_set_evaluation(std::span<const FeatureVector> first_set,
                                      std::span<const FeatureVector> second_set,
                                      const CancelableDatabase& db);

/// Ordinary least squares y = slope*x + intercept plus the Pearson
/// correlation. Zero variance in x is an input_error; a constant y gives
/// slope 0 and r = 0.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};
LinearFit correlation_first_second(std::span<const std::size_t> first_counts,
                                   std::span<const std::size_t> second_counts);

}  // namespace bmk
