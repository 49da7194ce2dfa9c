// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bmk/types.hpp"

namespace bmk {

/// Parameters of the synthetic Gaussian feature database: person centroids are
/// N(0, inter_scale^2 I), samples add N(0, intra_sigma^2 I) noise. Person ids
/// are canonical ("p0".."p{n-1}").
struct SyntheticDbSpec {
  std::size_t persons = 0;             // n
  std::size_t samples_per_person = 0;  // t
  std::size_t dimension = 0;           // N
  double intra_sigma = 0.0;
  double inter_scale = 1.0;
  Seed rng_seed;
};

FeatureDatabase generate_synthetic_db(const SyntheticDbSpec& spec);

/// Binary-searches intra_sigma (inter_scale fixed) until the raw Euclidean EER
/// of the generated database is within tol of target_eer. Returns the sigma;
/// the EER is monotone in it.
double tune_intra_sigma(SyntheticDbSpec spec, double target_eer,
                        double tol = 0.005, int max_iter = 40);

enum class FeatureFormat { Csv, Fvdb };

/// Picks Fvdb for a ".fvdb" extension, Csv otherwise.
FeatureFormat feature_format_for_path(const std::filesystem::path& path);

/// CSV rows are `person_id,sample_id,f0,...,f{N-1}`; FVDB is the little-endian
/// binary layout in docs/FORMATS.md (index-keyed: loading yields canonical
/// "p{index}" ids). Parse failures name the line or byte offset; databases
/// whose persons have unequal sample counts are rejected.
FeatureDatabase load_feature_db(const std::filesystem::path& path, FeatureFormat format);
FeatureDatabase load_feature_db(const std::filesystem::path& path);
void save_feature_db(const std::filesystem::path& path, const FeatureDatabase& db,
                     FeatureFormat format);
void save_feature_db(const std::filesystem::path& path, const FeatureDatabase& db);

/// JSON document with the transform config, tau_b, and entries as (person_id,
/// 32-hex-char seed, hex-packed bits or float array). Round-trips bit-exactly.
void save_cancelable_db(const std::filesystem::path& path, const CancelableDatabase& db);
CancelableDatabase load_cancelable_db(const std::filesystem::path& path);

/// Enrolls person i with template T(s_i, x_i^0) (every sample when
/// all_samples is set, sharing the person's seed). Seeds come from the stream
/// of root_seed, one derived sub-stream per person; a degenerate Gram-Schmidt
/// draw advances to the next candidate seed.
CancelableDatabase enroll(const FeatureDatabase& features, const TransformConfig& config,
                          double tau_b, Seed root_seed, bool all_samples = false);

/// Experiment record with enough provenance (config echo, seeds, prng id,
/// version) to recompute every metric offline.
struct ExperimentReport {
  std::string experiment;
  std::map<std::string, std::string> config;
  std::map<std::string, double> metrics;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
};

std::string report_to_json(const ExperimentReport& report);
void write_report(const std::filesystem::path& path, const ExperimentReport& report);

/// Plot series as two-column CSV with a header row.
void write_series_csv(const std::filesystem::path& path, const std::string& x_name,
                      const std::string& y_name,
                      const std::vector<std::pair<double, double>>& rows);

}  // namespace bmk
