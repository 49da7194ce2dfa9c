// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmk/types.hpp"

namespace bmk {

double euclidean_distance(std::span<const double> x, std::span<const double> y);
double euclidean_distance(const FeatureVector& x, const FeatureVector& y);

std::size_t hamming_distance(const BinaryTemplate& u, const BinaryTemplate& v);

/// Distance between templates of the same kind: Euclidean for real templates,
/// Hamming for binary ones. Mixing kinds is a dimension_error.
double template_distance(const Template& a, const Template& b);

/// Acceptance predicate: distance strictly below the threshold.
bool verify(const Template& a, const Template& b, double tau);
bool verify(const FeatureVector& x, const FeatureVector& y, double tau);

/// Database authentication for a probe (x, s): an entry matches iff its seed
/// equals the probe seed and T(s, x) verifies against the stored template.
struct AuthReport {
  std::vector<std::size_t> matched_entries;
  bool success = false;
};
AuthReport authenticate(const CancelableDatabase& db, const FeatureVector& probe,
                        Seed probe_seed, double tau_b);

enum class Metric { Euclidean, Hamming };

/// Genuine (same person) and impostor (cross person) match scores.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  Metric metric = Metric::Euclidean;
};

struct RocPoint {
  double threshold;
  double fmr;   // fraction of impostor scores < threshold
  double fnmr;  // fraction of genuine scores >= threshold
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::vector<RocPoint> roc;
};

/// Sweeps thresholds over the merged score values plus midpoints. FMR is
/// non-decreasing and FNMR non-increasing in the threshold; the EER is read at
/// the crossing, linearly interpolated between adjacent sweep points when no
/// exact crossing exists.
EerResult compute_eer(const ScoreSet& scores);

/// Scoring protocol for a raw feature database: genuine scores are all
/// within-person sample pairs; impostor scores pair the first sample of each
/// person with the first sample of every other person (upper triangle).
ScoreSet collect_feature_scores(const FeatureDatabase& db);

/// Same pairing over a cancelable database in the stolen-token model: every
/// comparison is computed under the claimed identity's seed. Genuine pairs of
/// person i use seed s_i; the impostor pair {i, j} with i < j probes person
/// j's first sample against person i's first template under s_i. Persons
/// without an entry in `db` are skipped.
ScoreSet collect_cancelable_scores(const FeatureDatabase& features,
                                   const CancelableDatabase& db,
                                   unsigned threads = 0);

/// Pairwise squared-distance distortion of the real-valued projection
/// f(x) = x * M_s over a point set, as ratios r = |f(x)-f(y)|^2 / |x-y|^2.
struct JlDistortion {
  double epsilon = 0.0;     // mean over pairs of |r - 1|
  double max_deviation = 0.0;  // max over pairs of |r - 1|
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t pairs = 0;
};

JlDistortion estimate_jl_distortion(std::span<const FeatureVector> vectors,
                                    const TransformConfig& config, Seed seed);

/// The distortion estimate epsilon (mean |r - 1| over pairs with nonzero
/// source distance). Requires a real (non-binarized) config and at least two
/// distinct vectors.
double estimate_jl_epsilon(std::span<const FeatureVector> vectors,
                           const TransformConfig& config, Seed seed);

}  // namespace bmk
