// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/ga_masterkey.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bmk/eval.hpp"
#include "bmk/parallel.hpp"
#include "bmk/seed_stream.hpp"

namespace bmk {

CoverageContext::CoverageContext(const CancelableDatabase& db, bool first_template_only)
    : config_(db.config), tau_b_(db.tau_b) {
  validate_config(config_);
  std::unordered_map<std::string, std::size_t> index;
  for (const CancelableEntry& e : db.entries) {
    auto [it, inserted] = index.emplace(e.person_id, person_ids_.size());
    if (inserted) person_ids_.push_back(e.person_id);
    else if (first_template_only)
      continue;
    entries_.push_back({it->second, generate_matrix(e.seed, config_), e.tmpl});
  }
}

std::vector<double> CoverageContext::min_distances(const FeatureVector& x) const {
  std::vector<double> min_dists(person_ids_.size(),
                                std::numeric_limits<double>::infinity());
  for (const EntryRef& e : entries_) {
    const Template probe = transform_with_matrix(e.matrix, x);
    const double d = template_distance(probe, e.tmpl);
    min_dists[e.person] = std::min(min_dists[e.person], d);
  }
  return min_dists;
}

std::size_t CoverageContext::covered_count(const std::vector<double>& min_dists) const {
  std::size_t covered = 0;
  for (double d : min_dists)
    if (d < tau_b_) ++covered;
  return covered;
}

namespace {

CoverageReport report_from_distances(const CoverageContext& context,
                                     const std::vector<double>& min_dists) {
  CoverageReport report;
  report.min_distances = min_dists;
  for (std::size_t p = 0; p < min_dists.size(); ++p)
    if (min_dists[p] < context.tau_b())
      report.covered_ids.push_back(context.person_ids()[p]);
  report.coverage = min_dists.empty()
                        ? 0.0
                        : static_cast<double>(report.covered_ids.size()) /
                              static_cast<double>(min_dists.size());
  return report;
}

}  // namespace

CoverageReport masterkey_coverage(const FeatureVector& x, const CoverageContext& context) {
  return report_from_distances(context, context.min_distances(x));
}

CoverageReport masterkey_coverage(const FeatureVector& x, const CancelableDatabase& db) {
  return masterkey_coverage(x, CoverageContext(db));
}

namespace {

struct Evaluation {
  double fitness = 0.0;
  double coverage = 0.0;
  std::vector<double> min_dists;
};

Evaluation evaluate_individual(const CoverageContext& context,
                               const std::vector<bool>& active, std::size_t active_count,
                               double tau_b, FitnessKind kind, const FeatureVector& x) {
  Evaluation ev;
  ev.min_dists = context.min_distances(x);
  std::size_t covered = 0;
  double sum_uncovered = 0.0;
  double sum_all = 0.0;
  for (std::size_t p = 0; p < ev.min_dists.size(); ++p) {
    if (!active[p]) continue;
    const double d = ev.min_dists[p];
    sum_all += d;
    if (d < tau_b)
      ++covered;
    else
      sum_uncovered += d;
  }
  ev.coverage = active_count == 0
                    ? 0.0
                    : static_cast<double>(covered) / static_cast<double>(active_count);
  ev.fitness = kind == FitnessKind::SumUnauthenticated
                   ? sum_uncovered
                   : sum_all / static_cast<double>(std::max<std::size_t>(active_count, 1));
  return ev;
}

/// (coverage desc, fitness asc); true when a beats b.
bool better(double cov_a, double fit_a, double cov_b, double fit_b) {
  if (cov_a != cov_b) return cov_a > cov_b;
  return fit_a < fit_b;
}

void validate_ga_config(const GaConfig& cfg, const CoverageContext& context) {
  if (context.person_count() == 0) throw input_error("GA needs a non-empty database");
  if (!context.config().binarize)
    throw config_error("GA fitness is defined on Hamming distances; database must "
                       "hold binary templates");
  if (cfg.population_size < 2) throw config_error("population size must be >= 2");
  if (cfg.iterations < 1) throw config_error("iteration count must be >= 1");
  if (!(cfg.selection_fraction > 0.0) || !(cfg.selection_fraction < 1.0))
    throw config_error("selection fraction must lie in (0, 1)");
  if (cfg.init_stats) {
    if (cfg.init_stats->mean.size() != context.config().input_dim ||
        cfg.init_stats->stddev.size() != context.config().input_dim)
      throw dimension_error("coordinate statistics must match the input dimension");
  }
}

MasterkeyResult ga_search_impl(const CoverageContext& context,
                               const std::vector<bool>& active, const GaConfig& cfg,
                               double tau_b) {
  validate_ga_config(cfg, context);
  const std::size_t n_coords = context.config().input_dim;
  const std::size_t pop = cfg.population_size;
  const std::size_t active_count =
      static_cast<std::size_t>(std::count(active.begin(), active.end(), true));

  const Seed init_root = derive_seed(cfg.rng_seed, 1);
  const Seed evolve_root = derive_seed(cfg.rng_seed, 2);

  const auto coord_mean = [&](std::size_t c) {
    return cfg.init_stats ? cfg.init_stats->mean[c] : 0.0;
  };
  const auto coord_sigma = [&](std::size_t c) {
    return cfg.init_stats ? cfg.init_stats->stddev[c] : 1.0;
  };

  std::vector<FeatureVector> population(pop);
  for (std::size_t p = 0; p < pop; ++p) {
    SeedStream stream(derive_seed(init_root, p));
    NormalSampler normals(stream);
    population[p].values.resize(n_coords);
    for (std::size_t c = 0; c < n_coords; ++c)
      population[p].values[c] = coord_mean(c) + coord_sigma(c) * normals.next();
  }

  std::vector<Evaluation> evals(pop);
  const auto evaluate_all = [&] {
    parallel_for(pop, cfg.threads, [&](std::size_t p) {
      evals[p] = evaluate_individual(context, active, active_count, tau_b, cfg.fitness,
                                     population[p]);
    });
  };
  evaluate_all();

  MasterkeyResult best;
  best.coverage = -1.0;
  best.fitness = std::numeric_limits<double>::infinity();
  std::vector<double> best_min_dists;
  const auto consider = [&](std::size_t p) {
    if (better(evals[p].coverage, evals[p].fitness, best.coverage, best.fitness)) {
      best.masterkey = population[p];
      best.coverage = evals[p].coverage;
      best.fitness = evals[p].fitness;
      best_min_dists = evals[p].min_dists;
    }
  };
  for (std::size_t p = 0; p < pop; ++p) consider(p);

  const std::size_t keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.selection_fraction * static_cast<double>(pop))),
      1, pop - 1);

  std::vector<std::size_t> order(pop);
  best.trace.reserve(cfg.iterations);
  for (std::size_t gen = 1; gen <= cfg.iterations; ++gen) {
    // Truncation selection on fitness; index breaks ties deterministically.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (evals[a].fitness != evals[b].fitness) return evals[a].fitness < evals[b].fitness;
      return a < b;
    });

    std::vector<FeatureVector> parents(keep);
    std::vector<Evaluation> parent_evals(keep);
    for (std::size_t s = 0; s < keep; ++s) {
      parents[s] = population[order[s]];
      parent_evals[s] = evals[order[s]];
    }

    for (std::size_t s = 0; s < keep; ++s) {
      population[s] = parents[s];
      evals[s] = parent_evals[s];
    }
    for (std::size_t child = keep; child < pop; ++child) {
      SeedStream stream(
          derive_seed(evolve_root, (static_cast<std::uint64_t>(gen) << 32) | child));
      NormalSampler normals(stream);
      const std::size_t a = stream.next() % keep;
      const std::size_t b =
          keep == 1 ? a : (a + 1 + stream.next() % (keep - 1)) % keep;
      FeatureVector& out = population[child];
      out.values.resize(n_coords);
      for (std::size_t c = 0; c < n_coords; ++c)
        out.values[c] =
            stream.next_unit() < 0.5 ? parents[a].values[c] : parents[b].values[c];
      for (std::size_t c = 0; c < n_coords; ++c)
        if (stream.next_unit() < cfg.mutation_rate)
          out.values[c] += cfg.mutation_sigma * coord_sigma(c) * normals.next();
    }

    parallel_for(pop - keep, cfg.threads, [&](std::size_t i) {
      const std::size_t p = keep + i;
      evals[p] = evaluate_individual(context, active, active_count, tau_b, cfg.fitness,
                                     population[p]);
    });
    for (std::size_t p = keep; p < pop; ++p) consider(p);

    best.trace.push_back({gen, best.fitness, best.coverage});
  }

  for (std::size_t p = 0; p < best_min_dists.size(); ++p)
    if (active[p] && best_min_dists[p] < tau_b)
      best.covered_ids.push_back(context.person_ids()[p]);
  return best;
}

}  // namespace

MasterkeyResult ga_search(const CancelableDatabase& db, const GaConfig& cfg) {
  CoverageContext context(db, cfg.first_template_only);
  std::vector<bool> active(context.person_count(), true);
  return ga_search_impl(context, active, cfg, context.tau_b());
}

std::vector<MasterkeyResult> build_dictionary(const CancelableDatabase& db,
                                              const GaConfig& cfg) {
  CoverageContext context(db, cfg.first_template_only);
  std::vector<bool> active(context.person_count(), true);
  std::size_t remaining =
      static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  if (remaining == 0) throw input_error("dictionary needs a non-empty database");

  std::vector<MasterkeyResult> dictionary;
  std::size_t round = 0;
  while (remaining > 0) {
    MasterkeyResult result;
    bool progressed = false;
    for (std::uint64_t attempt = 0; attempt <= 3; ++attempt) {
      GaConfig round_cfg = cfg;
      round_cfg.rng_seed =
          derive_seed(cfg.rng_seed, (static_cast<std::uint64_t>(round) << 8) | attempt);
      result = ga_search_impl(context, active, round_cfg, context.tau_b());
      if (!result.covered_ids.empty()) {
        progressed = true;
        break;
      }
    }
    if (!progressed)
      throw stall_error("dictionary round " + std::to_string(round) +
                        " covered no persons after 3 restarts (" +
                        std::to_string(remaining) + " persons left)");
    for (const std::string& id : result.covered_ids) {
      for (std::size_t p = 0; p < context.person_ids().size(); ++p) {
        if (context.person_ids()[p] == id && active[p]) {
          active[p] = false;
          --remaining;
        }
      }
    }
    dictionary.push_back(std::move(result));
    ++round;
  }
  return dictionary;
}

std::vector<OcpRow> ocp_vs_threshold(const CancelableDatabase& db,
                                     const FeatureDatabase& features,
                                     const std::vector<double>& thresholds,
                                     const GaConfig& cfg) {
  const double m = static_cast<double>(db.config.output_dim);
  for (double tau : thresholds)
    if (tau < 0.0 || tau > m)
      throw input_error("threshold " + std::to_string(tau) + " outside [0, M]");

  const ScoreSet scores = collect_cancelable_scores(features, db, cfg.threads);
  std::vector<double> impostor = scores.impostor;
  std::sort(impostor.begin(), impostor.end());

  CoverageContext context(db, cfg.first_template_only);
  std::vector<bool> active(context.person_count(), true);

  std::vector<OcpRow> rows;
  rows.reserve(thresholds.size());
  for (double tau : thresholds) {
    OcpRow row;
    row.tau_b = tau;
    const auto it = std::lower_bound(impostor.begin(), impostor.end(), tau);
    row.fmr = impostor.empty() ? 0.0
                               : static_cast<double>(it - impostor.begin()) /
                                     static_cast<double>(impostor.size());
    row.coverage = ga_search_impl(context, active, cfg, tau).coverage;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bmk
