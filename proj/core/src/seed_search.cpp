// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/seed_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "bmk/eval.hpp"
#include "bmk/parallel.hpp"
#include "bmk/seed_stream.hpp"

namespace bmk {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void validate_search_config(const SeedSearchConfig& cfg) {
  if (!cfg.c_max && !cfg.time_budget_ms)
    throw config_error("seed search needs a trial cap or a time budget");
  if (!(cfg.tau_b > 0.0)) throw config_error("seed search needs tau_b > 0");
  validate_config(cfg.transform);
}

}  // namespace

SeedOutcome find_seed(std::span<const FeatureVector> masterkeys,
                      const FeatureVector& target, const SeedSearchConfig& cfg) {
  validate_search_config(cfg);
  if (masterkeys.empty()) throw input_error("seed search needs at least one masterkey");
  for (const FeatureVector& m : masterkeys)
    if (m.size() != target.size())
      throw dimension_error("masterkey dimension " + std::to_string(m.size()) +
                            " does not match target dimension " +
                            std::to_string(target.size()));

  // Candidates are transformed together with the target so each matrix
  // coefficient is drawn once per trial.
  std::vector<FeatureVector> inputs(masterkeys.begin(), masterkeys.end());
  inputs.push_back(target);

  const auto start = Clock::now();
  SeedStream candidates(cfg.rng_seed);

  SeedOutcome out;
  double best_worst = std::numeric_limits<double>::infinity();
  Seed best_seed;

  for (;;) {
    if (cfg.c_max && out.trials >= *cfg.c_max) break;
    if (cfg.time_budget_ms && elapsed_ms_since(start) >= *cfg.time_budget_ms) break;

    const Seed candidate = candidates.next_seed();
    ++out.trials;
    double worst = 0.0;
    try {
      const std::vector<Template> templates =
          transform_many(candidate, inputs, cfg.transform);
      const Template& target_template = templates.back();
      for (std::size_t m = 0; m < masterkeys.size(); ++m)
        worst = std::max(worst, template_distance(templates[m], target_template));
    } catch (const degenerate_matrix_error&) {
      continue;  // counted as a spent trial, never as a candidate
    }
    if (worst < cfg.tau_b) {
      out.status = SeedOutcomeStatus::Found;
      out.seed = candidate;
      out.worst_distance = worst;
      out.elapsed_ms = elapsed_ms_since(start);
      return out;
    }
    if (worst < best_worst) {
      best_worst = worst;
      best_seed = candidate;
    }
  }

  out.elapsed_ms = elapsed_ms_since(start);
  if (masterkeys.size() > 1 && out.trials > 0) {
    out.status = SeedOutcomeStatus::Fallback;
    out.seed = best_seed;
    out.worst_distance = best_worst;
  } else {
    out.status = SeedOutcomeStatus::Failure;
  }
  return out;
}

CompliantBuild build_compliant_database(std::span<const FeatureVector> masterkeys,
                                        const FeatureDatabase& features,
                                        std::size_t sample_index,
                                        std::optional<std::size_t> exclude_person,
                                        const SeedSearchConfig& cfg) {
  validate_search_config(cfg);
  if (masterkeys.empty()) throw input_error("seed search needs at least one masterkey");
  for (std::size_t p = 0; p < features.persons.size(); ++p)
    if (sample_index >= features.persons[p].samples.size())
      throw input_error("person '" + features.persons[p].person_id +
                        "' has no sample " + std::to_string(sample_index));

  std::vector<std::size_t> searched;
  for (std::size_t p = 0; p < features.persons.size(); ++p)
    if (!exclude_person || *exclude_person != p) searched.push_back(p);

  std::vector<SeedOutcome> outcomes(searched.size());
  parallel_for(searched.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t p = searched[i];
    SeedSearchConfig person_cfg = cfg;
    person_cfg.rng_seed = derive_seed(cfg.rng_seed, p);
    outcomes[i] =
        find_seed(masterkeys, features.persons[p].samples[sample_index], person_cfg);
  });

  CompliantBuild build;
  std::vector<CancelableEntry> entries;
  std::uint64_t found = 0;
  for (std::size_t i = 0; i < searched.size(); ++i) {
    const std::size_t p = searched[i];
    const SeedOutcome& outcome = outcomes[i];
    build.result.outcomes.push_back({features.persons[p].person_id, outcome});
    build.result.total_trials += outcome.trials;
    build.result.max_trials = std::max(build.result.max_trials, outcome.trials);
    build.result.total_elapsed_ms += outcome.elapsed_ms;
    if (outcome.status == SeedOutcomeStatus::Failure) continue;
    if (outcome.status == SeedOutcomeStatus::Found) ++found;
    entries.push_back({features.persons[p].person_id, outcome.seed,
                       transform(outcome.seed, features.persons[p].samples[sample_index],
                                 cfg.transform)});
  }
  build.result.success_fraction =
      searched.empty() ? 1.0
                       : static_cast<double>(found) / static_cast<double>(searched.size());
  build.result.mean_trials =
      searched.empty() ? 0.0
                       : static_cast<double>(build.result.total_trials) /
                             static_cast<double>(searched.size());
  build.db = make_cancelable_database(cfg.transform, cfg.tau_b, std::move(entries));
  return build;
}

namespace {

std::vector<double> coverage_curve(const std::vector<std::size_t>& counts,
                                   std::size_t n_entries) {
  std::vector<double> curve(n_entries + 1, 0.0);
  if (counts.empty()) return curve;
  for (std::size_t k = 0; k <= n_entries; ++k) {
    std::size_t at_least = 0;
    for (std::size_t c : counts)
      if (c >= k) ++at_least;
    curve[k] = static_cast<double>(at_least) / static_cast<double>(counts.size());
  }
  return curve;
}

}  // namespace

SecondSetReport second_set_evaluation(std::span<const FeatureVector> first_set,
                                      std::span<const FeatureVector> second_set,
                                      const CancelableDatabase& db) {
  const CoverageContext context(db);
  const auto count_matches = [&](const FeatureVector& v) {
    return context.covered_count(context.min_distances(v));
  };
  SecondSetReport report;
  for (const FeatureVector& v : first_set) report.first_counts.push_back(count_matches(v));
  for (const FeatureVector& v : second_set)
    report.second_counts.push_back(count_matches(v));
  report.first_curve = coverage_curve(report.first_counts, context.person_count());
  report.second_curve = coverage_curve(report.second_counts, context.person_count());
  return report;
}

LinearFit correlation_first_second(std::span<const std::size_t> first_counts,
                                   std::span<const std::size_t> second_counts) {
  if (first_counts.size() != second_counts.size() || first_counts.empty())
    throw input_error("correlation needs equally sized, non-empty count lists");
  const double n = static_cast<double>(first_counts.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < first_counts.size(); ++i) {
    mean_x += static_cast<double>(first_counts[i]);
    mean_y += static_cast<double>(second_counts[i]);
  }
  mean_x /= n;
  mean_y /= n;
  double var_x = 0.0, var_y = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < first_counts.size(); ++i) {
    const double dx = static_cast<double>(first_counts[i]) - mean_x;
    const double dy = static_cast<double>(second_counts[i]) - mean_y;
    var_x += dx * dx;
    var_y += dy * dy;
    cov += dx * dy;
  }
  if (var_x == 0.0)
    throw input_error("correlation undefined: first-set counts have zero variance");
  LinearFit fit;
  fit.slope = cov / var_x;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.r = (var_y == 0.0 || cov == 0.0) ? 0.0 : cov / std::sqrt(var_x * var_y);
  return fit;
}

}  // namespace bmk
