// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bmk/transform.hpp"
#include "bmk/types.hpp"

namespace bmk {

enum class FitnessKind {
  /// Sum over not-yet-covered persons of their minimal template distance.
  SumUnauthenticated,
  /// Mean over all persons of their minimal template distance.
  AverageMinDistance,
};

/// Per-coordinate statistics used to initialize the population and to scale
/// mutation noise. Without them, coordinates start standard normal.
struct CoordinateStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

enum class CrossoverScheme { UniformPerCoordinate };

struct GaConfig {
  std::size_t population_size = 200;
  std::size_t iterations = 500;
  FitnessKind fitness = FitnessKind::SumUnauthenticated;
  double selection_fraction = 0.25;
  double mutation_rate = 0.05;
  /// Mutation noise as a multiple of the per-coordinate stddev (1.0 without stats).
  double mutation_sigma = 0.1;
  CrossoverScheme crossover = CrossoverScheme::UniformPerCoordinate;
  Seed rng_seed;
  std::optional<CoordinateStats> init_stats;
  /// Keep only the first enrolled template of each person during evaluation.
  bool first_template_only = true;
  unsigned threads = 0;
};

/// Precomputed projection matrices and grouped templates for one cancelable
/// database. Read-only after construction; safe to share across threads.
class CoverageContext {
 public:
  CoverageContext(const CancelableDatabase& db, bool first_template_only = false);

  std::size_t person_count() const { return person_ids_.size(); }
  const std::vector<std::string>& person_ids() const { return person_ids_; }
  double tau_b() const { return tau_b_; }
  const TransformConfig& config() const { return config_; }

  /// Per-person minimal distance between T(s_i, x) and that person's templates.
  std::vector<double> min_distances(const FeatureVector& x) const;
  /// Persons whose minimal distance verifies (< tau_b).
  std::size_t covered_count(const std::vector<double>& min_dists) const;

 private:
  struct EntryRef {
    std::size_t person;
    ProjectionMatrix matrix;
    Template tmpl;
  };
  TransformConfig config_;
  double tau_b_;
  std::vector<std::string> person_ids_;
  std::vector<EntryRef> entries_;
};

/// Coverage of a candidate masterkey: a person is covered iff the distance
/// between T(s_i, x) and its template is strictly under tau_b, taking the
/// minimum over that person's enrolled templates.
struct CoverageReport {
  std::vector<std::string> covered_ids;  // in database person order
  std::vector<double> min_distances;     // per distinct person
  double coverage = 0.0;                 // |covered| / n
};

CoverageReport masterkey_coverage(const FeatureVector& x, const CancelableDatabase& db);
CoverageReport masterkey_coverage(const FeatureVector& x, const CoverageContext& context);

struct TraceRow {
  std::size_t iteration;
  double best_fitness;
  double best_coverage;
};

struct MasterkeyResult {
  FeatureVector masterkey;
  std::vector<std::string> covered_ids;
  double coverage = 0.0;
  double fitness = 0.0;
  std::vector<TraceRow> trace;  // best-so-far per iteration
};

/// Genetic search for a single masterkey over a binary cancelable database.
/// Selection keeps the best fraction by fitness, offspring come from uniform
/// per-coordinate crossover plus Gaussian mutation, and the returned result is
/// the best individual ever seen ranked by (coverage desc, fitness asc).
/// Deterministic in cfg.rng_seed for any thread count.
MasterkeyResult ga_search(const CancelableDatabase& db, const GaConfig& cfg);

/// Greedy dictionary: search, drop covered persons, repeat on the residual
/// database until everyone is covered. A round covering nobody is retried up
/// to 3 times with derived seeds before raising stall_error. The dictionary
/// size is the returned list's length.
std::vector<MasterkeyResult> build_dictionary(const CancelableDatabase& db, const GaConfig& cfg);

struct OcpRow {
  double tau_b;
  double fmr;       // impostor acceptance rate at this threshold
  double coverage;  // best GA coverage found at this threshold
};

/// Coverage-versus-threshold table. FMR at each threshold is recomputed from
/// stolen-token impostor scores, which need the raw feature vectors.
std::vector<OcpRow> ocp_vs_threshold(const CancelableDatabase& db,
                                     const FeatureDatabase& features,
                                     const std::vector<double>& thresholds,
                                     const GaConfig& cfg);

}  // namespace bmk
