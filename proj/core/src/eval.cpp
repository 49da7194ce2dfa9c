// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "bmk/parallel.hpp"
#include "bmk/transform.hpp"

namespace bmk {

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw dimension_error("euclidean distance over dimensions " + std::to_string(x.size()) +
                          " and " + std::to_string(y.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double euclidean_distance(const FeatureVector& x, const FeatureVector& y) {
  return euclidean_distance(std::span<const double>(x.values),
                            std::span<const double>(y.values));
}

std::size_t hamming_distance(const BinaryTemplate& u, const BinaryTemplate& v) {
  if (u.size() != v.size())
    throw dimension_error("hamming distance over lengths " + std::to_string(u.size()) +
                          " and " + std::to_string(v.size()));
  const std::vector<std::uint8_t>& a = u.bytes();
  const std::vector<std::uint8_t>& b = v.bytes();
  std::size_t total = 0;
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    std::uint64_t wa, wb;
    std::memcpy(&wa, a.data() + i, 8);
    std::memcpy(&wb, b.data() + i, 8);
    total += static_cast<std::size_t>(std::popcount(wa ^ wb));
  }
  for (; i < a.size(); ++i)
    total += static_cast<std::size_t>(std::popcount(static_cast<std::uint8_t>(a[i] ^ b[i])));
  return total;
}

double template_distance(const Template& a, const Template& b) {
  if (is_binary(a) != is_binary(b))
    throw dimension_error("cannot compare a real template with a binary one");
  if (is_binary(a))
    return static_cast<double>(
        hamming_distance(std::get<BinaryTemplate>(a), std::get<BinaryTemplate>(b)));
  return euclidean_distance(std::get<RealTemplate>(a).values,
                            std::get<RealTemplate>(b).values);
}

bool verify(const Template& a, const Template& b, double tau) {
  return template_distance(a, b) < tau;
}

bool verify(const FeatureVector& x, const FeatureVector& y, double tau) {
  return euclidean_distance(x, y) < tau;
}

AuthReport authenticate(const CancelableDatabase& db, const FeatureVector& probe,
                        Seed probe_seed, double tau_b) {
  AuthReport report;
  // T(s, probe) is the same for every entry sharing the probe seed.
  Template probe_template;
  bool have_template = false;
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    if (db.entries[i].seed != probe_seed) continue;
    if (!have_template) {
      probe_template = transform(probe_seed, probe, db.config);
      have_template = true;
    }
    if (verify(probe_template, db.entries[i].tmpl, tau_b))
      report.matched_entries.push_back(i);
  }
  report.success = !report.matched_entries.empty();
  return report;
}

namespace {

struct SweepArrays {
  std::vector<double> genuine_sorted;
  std::vector<double> impostor_sorted;

  double fmr(double tau) const {
    const auto it = std::lower_bound(impostor_sorted.begin(), impostor_sorted.end(), tau);
    return static_cast<double>(it - impostor_sorted.begin()) /
           static_cast<double>(impostor_sorted.size());
  }
  double fnmr(double tau) const {
    const auto it = std::lower_bound(genuine_sorted.begin(), genuine_sorted.end(), tau);
    return static_cast<double>(genuine_sorted.end() - it) /
           static_cast<double>(genuine_sorted.size());
  }
};

}  // namespace

EerResult compute_eer(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw input_error("EER needs non-empty genuine and impostor score sets");

  SweepArrays arrays{scores.genuine, scores.impostor};
  std::sort(arrays.genuine_sorted.begin(), arrays.genuine_sorted.end());
  std::sort(arrays.impostor_sorted.begin(), arrays.impostor_sorted.end());

  std::vector<double> values;
  values.reserve(arrays.genuine_sorted.size() + arrays.impostor_sorted.size());
  values.insert(values.end(), arrays.genuine_sorted.begin(), arrays.genuine_sorted.end());
  values.insert(values.end(), arrays.impostor_sorted.begin(), arrays.impostor_sorted.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Sweep over every distinct score, the midpoints between neighbors, and one
  // point past the maximum, so the ROC runs from (0, 1) to (1, 0).
  std::vector<double> sweep;
  sweep.reserve(2 * values.size() + 1);
  for (std::size_t k = 0; k < values.size(); ++k) {
    sweep.push_back(values[k]);
    if (k + 1 < values.size()) sweep.push_back(0.5 * (values[k] + values[k + 1]));
  }
  sweep.push_back(values.back() + 1.0);

  EerResult result;
  result.roc.reserve(sweep.size());
  for (double tau : sweep)
    result.roc.push_back({tau, arrays.fmr(tau), arrays.fnmr(tau)});

  // fmr - fnmr is non-decreasing from -1 to +1; find the sign change.
  std::size_t cross = 0;
  for (std::size_t k = 0; k + 1 < result.roc.size(); ++k) {
    const double d0 = result.roc[k].fmr - result.roc[k].fnmr;
    const double d1 = result.roc[k + 1].fmr - result.roc[k + 1].fnmr;
    if (d0 <= 0.0 && d1 >= 0.0) {
      cross = k;
      break;
    }
  }
  const RocPoint& p0 = result.roc[cross];
  const RocPoint& p1 = result.roc[cross + 1];
  const double d0 = p0.fmr - p0.fnmr;
  const double d1 = p1.fmr - p1.fnmr;
  if (d0 == 0.0 || d1 == d0) {
    result.eer = 0.5 * (p0.fmr + p0.fnmr);
    result.threshold = p0.threshold;
  } else {
    const double t = -d0 / (d1 - d0);
    result.eer = p0.fmr + t * (p1.fmr - p0.fmr);
    result.threshold = p0.threshold + t * (p1.threshold - p0.threshold);
  }
  return result;
}

ScoreSet collect_feature_scores(const FeatureDatabase& db) {
  ScoreSet scores;
  scores.metric = Metric::Euclidean;
  for (const PersonRecord& rec : db.persons)
    for (std::size_t a = 0; a < rec.samples.size(); ++a)
      for (std::size_t b = a + 1; b < rec.samples.size(); ++b)
        scores.genuine.push_back(euclidean_distance(rec.samples[a], rec.samples[b]));
  for (std::size_t i = 0; i < db.persons.size(); ++i)
    for (std::size_t j = i + 1; j < db.persons.size(); ++j)
      scores.impostor.push_back(
          euclidean_distance(db.persons[i].samples.front(), db.persons[j].samples.front()));
  return scores;
}

ScoreSet collect_cancelable_scores(const FeatureDatabase& features,
                                   const CancelableDatabase& db, unsigned threads) {
  // First enrolled seed per person, in feature-database person order.
  PersonIndex feature_index(features);
  std::vector<std::size_t> scored_persons;
  std::vector<Seed> seeds;
  {
    std::vector<bool> seen(features.person_count(), false);
    for (const CancelableEntry& e : db.entries) {
      const std::size_t p = feature_index.at(e.person_id);
      if (!seen[p]) {
        seen[p] = true;
        scored_persons.push_back(p);
        seeds.push_back(e.seed);
      }
    }
  }
  std::sort(scored_persons.begin(), scored_persons.end());
  // Restore the seed pairing after the sort.
  {
    std::unordered_map<std::string, Seed> by_id;
    for (const CancelableEntry& e : db.entries)
      by_id.emplace(e.person_id, e.seed);
    for (std::size_t k = 0; k < scored_persons.size(); ++k)
      seeds[k] = by_id.at(features.persons[scored_persons[k]].person_id);
  }

  const std::size_t m = scored_persons.size();
  // Under person k's seed, transform that person's samples plus the first
  // sample of every higher-ordered person: the impostor pair {k, l} with
  // k < l is scored once, under the lower-ordered person's seed.
  std::vector<std::vector<double>> genuine_parts(m);
  std::vector<std::vector<double>> impostor_parts(m);
  parallel_for(m, threads, [&](std::size_t k) {
    const PersonRecord& target = features.persons[scored_persons[k]];
    std::vector<FeatureVector> inputs = target.samples;
    for (std::size_t l = k + 1; l < m; ++l)
      inputs.push_back(features.persons[scored_persons[l]].samples.front());
    const std::vector<Template> templates = transform_many(seeds[k], inputs, db.config);

    const std::size_t t = target.samples.size();
    for (std::size_t a = 0; a < t; ++a)
      for (std::size_t b = a + 1; b < t; ++b)
        genuine_parts[k].push_back(template_distance(templates[a], templates[b]));
    for (std::size_t l = k + 1; l < m; ++l)
      impostor_parts[k].push_back(
          template_distance(templates[t + (l - k - 1)], templates[0]));
  });

  ScoreSet scores;
  scores.metric = db.config.binarize ? Metric::Hamming : Metric::Euclidean;
  for (std::size_t k = 0; k < m; ++k) {
    scores.genuine.insert(scores.genuine.end(), genuine_parts[k].begin(),
                          genuine_parts[k].end());
    scores.impostor.insert(scores.impostor.end(), impostor_parts[k].begin(),
                           impostor_parts[k].end());
  }
  return scores;
}

JlDistortion estimate_jl_distortion(std::span<const FeatureVector> vectors,
                                    const TransformConfig& config, Seed seed) {
  if (config.binarize)
    throw config_error("distortion estimation needs a real (non-binarized) projection");
  if (vectors.size() < 2)
    throw input_error("distortion estimation needs at least two vectors");

  const ProjectionMatrix matrix = generate_matrix(seed, config);
  std::vector<std::vector<double>> projected(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) projected[i] = matrix.apply(vectors[i]);

  JlDistortion result;
  result.min_ratio = std::numeric_limits<double>::infinity();
  result.max_ratio = 0.0;
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      double src = 0.0;
      for (std::size_t k = 0; k < vectors[i].size(); ++k) {
        const double d = vectors[i].values[k] - vectors[j].values[k];
        src += d * d;
      }
      if (src == 0.0) continue;  // identical inputs carry no distortion information
      double dst = 0.0;
      for (std::size_t k = 0; k < projected[i].size(); ++k) {
        const double d = projected[i][k] - projected[j][k];
        dst += d * d;
      }
      const double ratio = dst / src;
      result.min_ratio = std::min(result.min_ratio, ratio);
      result.max_ratio = std::max(result.max_ratio, ratio);
      result.max_deviation = std::max(result.max_deviation, std::abs(ratio - 1.0));
      sum_abs += std::abs(ratio - 1.0);
      ++result.pairs;
    }
  }
  if (result.pairs == 0)
    throw input_error("distortion estimation needs at least two distinct vectors");
  result.epsilon = sum_abs / static_cast<double>(result.pairs);
  return result;
}

double estimate_jl_epsilon(std::span<const FeatureVector> vectors,
                           const TransformConfig& config, Seed seed) {
  return estimate_jl_distortion(vectors, config, seed).epsilon;
}

}  // namespace bmk
