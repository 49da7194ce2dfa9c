// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
//
// Command-line front end: synthetic data generation, enrollment, EER and
// distortion evaluation, masterkey search in both directions, and the
// closed-form trial calculator. Every subcommand emits an experiment report
// (JSON) and optional CSV plot series; runs with a fixed --seed are fully
// reproducible.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bmk/eval.hpp"
#include "bmk/ga_masterkey.hpp"
#include "bmk/io.hpp"
#include "bmk/seed_search.hpp"
#include "bmk/theory.hpp"
#include "bmk/transform.hpp"
#include "bmk/version.hpp"

namespace {

using namespace bmk;

constexpr const char* kDefaultSeedHex = "000102030405060708090a0b0c0d0e0f";

struct CommonOut {
  std::string report_path;

  void emit(const ExperimentReport& report) const {
    if (report_path.empty())
      std::cout << report_to_json(report) << "\n";
    else
      write_report(report_path, report);
  }
};

Seed parse_seed(const std::string& hex) { return Seed::from_hex(hex); }

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) out.push_back(std::stod(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw input_error("expected a comma-separated list of numbers");
  return out;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_double_list(text)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw input_error("expected non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string status_name(SeedOutcomeStatus status) {
  switch (status) {
    case SeedOutcomeStatus::Found: return "found";
    case SeedOutcomeStatus::Fallback: return "fallback";
    case SeedOutcomeStatus::Failure: return "failure";
  }
  return "?";
}

void write_outcomes_csv(const std::string& path, const SeedSearchResult& result) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  out << "person_id,status,seed_hex,trials,elapsed_ms,worst_distance\n";
  for (const PersonOutcome& po : result.outcomes) {
    out << po.person_id << "," << status_name(po.outcome.status) << ","
        << (po.outcome.status == SeedOutcomeStatus::Failure ? std::string(32, '-')
                                                            : po.outcome.seed.to_hex())
        << "," << po.outcome.trials << "," << po.outcome.elapsed_ms << ","
        << po.outcome.worst_distance << "\n";
  }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  out << "iteration,best_fitness,best_coverage\n";
  for (const TraceRow& row : trace)
    out << row.iteration << "," << row.best_fitness << "," << row.best_coverage << "\n";
}

FeatureDatabase masterkeys_as_db(const std::vector<FeatureVector>& keys,
                                 std::size_t dimension) {
  FeatureDatabase db;
  db.dimension = dimension;
  db.samples_per_person = 1;
  for (std::size_t i = 0; i < keys.size(); ++i)
    db.persons.push_back({"mk" + std::to_string(i), {keys[i]}});
  return db;
}

struct TransformFlags {
  std::string family = "jl2";
  std::size_t m = 128;
  bool no_binarize = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "Matrix family: gs, jl1, or jl2")
        ->check(CLI::IsMember({"gs", "gram-schmidt", "jl1", "jl2"}));
    cmd->add_option("--m", m, "Template length M");
    cmd->add_flag("--no-binarize", no_binarize, "Keep real-valued templates");
  }
  TransformConfig config(std::size_t input_dim) const {
    TransformConfig out;
    out.family = family_from_name(family);
    out.input_dim = input_dim;
    out.output_dim = m;
    out.binarize = !no_binarize;
    return out;
  }
};

// ---------------------------------------------------------------------------

int cmd_gen_db(const std::string& out_path, std::size_t n, std::size_t t,
               std::size_t dim, double intra_sigma, double inter_scale,
               std::optional<double> tune_eer, const std::string& seed_hex,
               const CommonOut& common) {
  SyntheticDbSpec spec{n, t, dim, intra_sigma, inter_scale, parse_seed(seed_hex)};
  if (tune_eer) spec.intra_sigma = tune_intra_sigma(spec, *tune_eer);
  const FeatureDatabase db = generate_synthetic_db(spec);
  save_feature_db(out_path, db);

  const EerResult eer = compute_eer(collect_feature_scores(db));
  ExperimentReport report;
  report.experiment = "gen-db";
  report.config["n"] = std::to_string(n);
  report.config["t"] = std::to_string(t);
  report.config["dim"] = std::to_string(dim);
  report.config["intra_sigma"] = std::to_string(spec.intra_sigma);
  report.config["inter_scale"] = std::to_string(inter_scale);
  report.config["seed"] = seed_hex;
  report.config["out"] = out_path;
  report.metrics["raw_eer"] = eer.eer;
  report.metrics["tau_a"] = eer.threshold;
  common.emit(report);
  return 0;
}

int cmd_enroll(const std::string& features_path, const std::string& out_path,
               const TransformFlags& tf, std::optional<double> tau, bool all_samples,
               const std::string& seed_hex, unsigned threads, const CommonOut& common) {
  const FeatureDatabase features = load_feature_db(features_path);
  const TransformConfig config = tf.config(features.dimension);

  CancelableDatabase db = enroll(features, config, tau.value_or(0.0),
                                 parse_seed(seed_hex), all_samples);
  const EerResult eer = compute_eer(collect_cancelable_scores(features, db, threads));
  if (!tau) db.tau_b = eer.threshold;  // operate at the cancelable EER by default
  save_cancelable_db(out_path, db);

  ExperimentReport report;
  report.experiment = "enroll";
  report.config["features"] = features_path;
  report.config["out"] = out_path;
  report.config["family"] = std::string(family_name(config.family));
  report.config["m"] = std::to_string(config.output_dim);
  report.config["binarize"] = config.binarize ? "true" : "false";
  report.config["seed"] = seed_hex;
  report.metrics["entries"] = static_cast<double>(db.entries.size());
  report.metrics["cancelable_eer"] = eer.eer;
  report.metrics["eer_threshold"] = eer.threshold;
  report.metrics["tau_b"] = db.tau_b;
  common.emit(report);
  return 0;
}

int cmd_eval_eer(const std::string& features_path, const std::string& cancelable_path,
                 const std::string& metric, const std::string& roc_path, unsigned threads,
                 const CommonOut& common) {
  const FeatureDatabase features = load_feature_db(features_path);
  ScoreSet scores;
  if (cancelable_path.empty()) {
    if (metric == "hamming")
      throw input_error("hamming scoring needs --cancelable");
    scores = collect_feature_scores(features);
  } else {
    const CancelableDatabase db = load_cancelable_db(cancelable_path);
    scores = collect_cancelable_scores(features, db, threads);
    if (!metric.empty()) {
      const bool want_hamming = metric == "hamming";
      if (want_hamming != (scores.metric == Metric::Hamming))
        throw input_error("--metric does not match the database's template kind");
    }
  }
  const EerResult eer = compute_eer(scores);

  ExperimentReport report;
  report.experiment = "eval-eer";
  report.config["features"] = features_path;
  if (!cancelable_path.empty()) report.config["cancelable"] = cancelable_path;
  report.config["metric"] = scores.metric == Metric::Hamming ? "hamming" : "euclidean";
  report.metrics["eer"] = eer.eer;
  report.metrics["threshold"] = eer.threshold;
  report.metrics["genuine_scores"] = static_cast<double>(scores.genuine.size());
  report.metrics["impostor_scores"] = static_cast<double>(scores.impostor.size());
  std::vector<std::pair<double, double>> fmr_series, fnmr_series;
  for (const RocPoint& p : eer.roc) {
    fmr_series.push_back({p.threshold, p.fmr});
    fnmr_series.push_back({p.threshold, p.fnmr});
  }
  report.series["fmr"] = fmr_series;
  report.series["fnmr"] = fnmr_series;
  if (!roc_path.empty()) write_series_csv(roc_path, "threshold", "fmr", fmr_series);
  common.emit(report);
  return 0;
}

int cmd_jl_epsilon(const std::string& features_path, std::size_t random_count,
                   std::size_t dim, const std::string& m_list,
                   const std::string& families, const std::string& seed_hex,
                   const std::string& csv_path, const CommonOut& common) {
  std::vector<FeatureVector> vectors;
  if (!features_path.empty()) {
    const FeatureDatabase features = load_feature_db(features_path);
    for (const PersonRecord& rec : features.persons)
      vectors.push_back(rec.samples.front());
    dim = features.dimension;
  } else {
    if (random_count < 2 || dim < 1)
      throw input_error("need --features, or --random with --dim");
    const Seed root = parse_seed(seed_hex);
    for (std::size_t i = 0; i < random_count; ++i) {
      SeedStream stream(derive_seed(root, 0xF00D + i));
      NormalSampler normals(stream);
      FeatureVector x;
      x.values.resize(dim);
      for (double& v : x.values) v = normals.next();
      vectors.push_back(std::move(x));
    }
  }

  ExperimentReport report;
  report.experiment = "jl-epsilon";
  report.config["vectors"] = std::to_string(vectors.size());
  report.config["dim"] = std::to_string(dim);
  report.config["seed"] = seed_hex;

  for (const std::string& family_token : {std::string("gs"), std::string("jl1"),
                                          std::string("jl2")}) {
    if (families.find(family_token) == std::string::npos) continue;
    std::vector<std::pair<double, double>> series;
    for (double m_value : parse_double_list(m_list)) {
      TransformConfig config;
      config.family = family_from_name(family_token);
      config.input_dim = dim;
      config.output_dim = static_cast<std::size_t>(m_value);
      config.binarize = false;
      const double eps = estimate_jl_epsilon(vectors, config, parse_seed(seed_hex));
      series.push_back({m_value, eps});
      report.metrics["epsilon_" + family_token + "_m" +
                     std::to_string(static_cast<int>(m_value))] = eps;
    }
    report.series["epsilon_" + family_token] = series;
    if (!csv_path.empty())
      write_series_csv(csv_path + "." + family_token + ".csv", "m", "epsilon", series);
  }
  common.emit(report);
  return 0;
}

GaConfig make_ga_config(std::size_t pop, std::size_t iters, const std::string& fitness,
                        double selection_fraction, double mutation_rate,
                        double mutation_sigma, const std::string& seed_hex,
                        unsigned threads) {
  GaConfig cfg;
  cfg.population_size = pop;
  cfg.iterations = iters;
  cfg.fitness = fitness == "avgmin" ? FitnessKind::AverageMinDistance
                                    : FitnessKind::SumUnauthenticated;
  cfg.selection_fraction = selection_fraction;
  cfg.mutation_rate = mutation_rate;
  cfg.mutation_sigma = mutation_sigma;
  cfg.rng_seed = parse_seed(seed_hex);
  cfg.threads = threads;
  return cfg;
}

int cmd_ga_masterkey(const std::string& cancelable_path, const GaConfig& cfg,
                     const std::string& trace_path, const std::string& masterkey_out,
                     const CommonOut& common) {
  const CancelableDatabase db = load_cancelable_db(cancelable_path);
  const MasterkeyResult result = ga_search(db, cfg);

  ExperimentReport report;
  report.experiment = "ga-masterkey";
  report.config["cancelable"] = cancelable_path;
  report.config["population"] = std::to_string(cfg.population_size);
  report.config["iterations"] = std::to_string(cfg.iterations);
  report.config["fitness"] =
      cfg.fitness == FitnessKind::AverageMinDistance ? "avgmin" : "sum";
  report.config["seed"] = cfg.rng_seed.to_hex();
  report.metrics["coverage"] = result.coverage;
  report.metrics["covered_persons"] = static_cast<double>(result.covered_ids.size());
  report.metrics["fitness"] = result.fitness;
  std::vector<std::pair<double, double>> coverage_series;
  for (const TraceRow& row : result.trace)
    coverage_series.push_back({static_cast<double>(row.iteration), row.best_coverage});
  report.series["best_coverage"] = coverage_series;

  if (!trace_path.empty()) write_trace_csv(trace_path, result.trace);
  if (!masterkey_out.empty())
    save_feature_db(masterkey_out,
                    masterkeys_as_db({result.masterkey}, result.masterkey.size()));
  common.emit(report);
  return 0;
}

int cmd_dictionary(const std::string& cancelable_path, const GaConfig& cfg,
                   const std::string& masterkeys_out, const CommonOut& common) {
  const CancelableDatabase db = load_cancelable_db(cancelable_path);
  const std::vector<MasterkeyResult> dictionary = build_dictionary(db, cfg);

  ExperimentReport report;
  report.experiment = "dictionary";
  report.config["cancelable"] = cancelable_path;
  report.config["seed"] = cfg.rng_seed.to_hex();
  report.metrics["dictionary_size"] = static_cast<double>(dictionary.size());
  std::vector<std::pair<double, double>> series;
  std::vector<FeatureVector> keys;
  for (std::size_t r = 0; r < dictionary.size(); ++r) {
    series.push_back({static_cast<double>(r),
                      static_cast<double>(dictionary[r].covered_ids.size())});
    keys.push_back(dictionary[r].masterkey);
  }
  report.series["covered_per_round"] = series;
  if (!masterkeys_out.empty() && !keys.empty())
    save_feature_db(masterkeys_out, masterkeys_as_db(keys, keys.front().size()));
  common.emit(report);
  return 0;
}

int cmd_ocp_table(const std::string& cancelable_path, const std::string& features_path,
                  const std::string& thresholds, const GaConfig& cfg,
                  const std::string& csv_path, const CommonOut& common) {
  const CancelableDatabase db = load_cancelable_db(cancelable_path);
  const FeatureDatabase features = load_feature_db(features_path);
  const std::vector<OcpRow> rows =
      ocp_vs_threshold(db, features, parse_double_list(thresholds), cfg);

  ExperimentReport report;
  report.experiment = "ocp-table";
  report.config["cancelable"] = cancelable_path;
  report.config["features"] = features_path;
  report.config["seed"] = cfg.rng_seed.to_hex();
  std::vector<std::pair<double, double>> fmr_series, ocp_series;
  for (const OcpRow& row : rows) {
    fmr_series.push_back({row.tau_b, row.fmr});
    ocp_series.push_back({row.tau_b, row.coverage});
  }
  report.series["fmr"] = fmr_series;
  report.series["ocp"] = ocp_series;
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw format_error("cannot open '" + csv_path + "' for writing");
    out << "tau_b,fmr,ocp\n";
    for (const OcpRow& row : rows)
      out << row.tau_b << "," << row.fmr << "," << row.coverage << "\n";
  }
  common.emit(report);
  return 0;
}

int cmd_seed_search(const std::string& features_path, std::size_t person,
                    std::size_t t_first, const std::string& first_set,
                    std::size_t target_sample, const TransformFlags& tf,
                    std::optional<double> tau, std::optional<std::uint64_t> c_max,
                    std::optional<double> budget_ms, const std::string& seed_hex,
                    unsigned threads, const std::string& out_path,
                    const std::string& outcomes_path, const CommonOut& common) {
  const FeatureDatabase features = load_feature_db(features_path);
  if (person >= features.person_count()) throw input_error("--person out of range");

  std::vector<std::size_t> first_indices;
  if (t_first > 0) {
    for (std::size_t j = 0; j < t_first; ++j) first_indices.push_back(j);
  } else {
    first_indices = parse_index_list(first_set);
  }
  std::vector<FeatureVector> masterkeys;
  for (std::size_t j : first_indices) {
    if (j >= features.persons[person].samples.size())
      throw input_error("first-set sample index out of range");
    masterkeys.push_back(features.persons[person].samples[j]);
  }

  SeedSearchConfig cfg;
  cfg.c_max = c_max;
  cfg.time_budget_ms = budget_ms;
  if (!cfg.c_max && !cfg.time_budget_ms) cfg.c_max = 1000000;
  cfg.transform = tf.config(features.dimension);
  cfg.rng_seed = parse_seed(seed_hex);
  cfg.threads = threads;
  if (tau) {
    cfg.tau_b = *tau;
  } else {
    // Default to the EER threshold of a random-seed enrollment.
    const CancelableDatabase reference =
        enroll(features, cfg.transform, 0.0, derive_seed(cfg.rng_seed, 0x5EED));
    cfg.tau_b = compute_eer(collect_cancelable_scores(features, reference, threads)).threshold;
  }

  const CompliantBuild build =
      build_compliant_database(masterkeys, features, target_sample, person, cfg);
  if (!out_path.empty()) save_cancelable_db(out_path, build.db);
  if (!outcomes_path.empty()) write_outcomes_csv(outcomes_path, build.result);

  ExperimentReport report;
  report.experiment = "seed-search";
  report.config["features"] = features_path;
  report.config["person"] = std::to_string(person);
  std::string first_echo;
  for (std::size_t j : first_indices)
    first_echo += (first_echo.empty() ? "" : ",") + std::to_string(j);
  report.config["first_set"] = first_echo;
  report.config["target_sample"] = std::to_string(target_sample);
  report.config["family"] = std::string(family_name(cfg.transform.family));
  report.config["m"] = std::to_string(cfg.transform.output_dim);
  report.config["binarize"] = cfg.transform.binarize ? "true" : "false";
  report.config["tau_b"] = std::to_string(cfg.tau_b);
  report.config["seed"] = seed_hex;
  if (cfg.c_max) report.config["c_max"] = std::to_string(*cfg.c_max);
  if (cfg.time_budget_ms)
    report.config["time_budget_ms"] = std::to_string(*cfg.time_budget_ms);
  report.metrics["persons_searched"] =
      static_cast<double>(build.result.outcomes.size());
  report.metrics["success_fraction"] = build.result.success_fraction;
  report.metrics["mean_trials"] = build.result.mean_trials;
  report.metrics["max_trials"] = static_cast<double>(build.result.max_trials);
  report.metrics["total_elapsed_ms"] = build.result.total_elapsed_ms;
  report.metrics["entries"] = static_cast<double>(build.db.entries.size());

  // Masterkey re-verification on the built database.
  if (!build.db.entries.empty()) {
    double min_coverage = 1.0;
    for (const FeatureVector& key : masterkeys)
      min_coverage = std::min(min_coverage, masterkey_coverage(key, build.db).coverage);
    report.metrics["first_set_min_coverage"] = min_coverage;
  }
  common.emit(report);
  return 0;
}

int cmd_second_set(const std::string& features_path, std::optional<std::size_t> person,
                   std::size_t t_first, std::size_t target_sample,
                   const TransformFlags& tf, std::optional<double> tau,
                   std::optional<std::uint64_t> c_max, std::optional<double> budget_ms,
                   const std::string& seed_hex, unsigned threads,
                   const std::string& csv_path, const CommonOut& common) {
  const FeatureDatabase features = load_feature_db(features_path);
  if (t_first < 1 || t_first >= features.samples_per_person)
    throw input_error("--t-first must leave at least one held-out sample");

  SeedSearchConfig cfg;
  cfg.c_max = c_max;
  cfg.time_budget_ms = budget_ms;
  if (!cfg.c_max && !cfg.time_budget_ms) cfg.c_max = 1000000;
  cfg.transform = tf.config(features.dimension);
  cfg.rng_seed = parse_seed(seed_hex);
  cfg.threads = threads;
  if (tau) {
    cfg.tau_b = *tau;
  } else {
    const CancelableDatabase reference =
        enroll(features, cfg.transform, 0.0, derive_seed(cfg.rng_seed, 0x5EED));
    cfg.tau_b = compute_eer(collect_cancelable_scores(features, reference, threads)).threshold;
  }

  std::vector<std::size_t> candidates;
  if (person) {
    if (*person >= features.person_count()) throw input_error("--person out of range");
    candidates.push_back(*person);
  } else {
    for (std::size_t p = 0; p < features.person_count(); ++p) candidates.push_back(p);
  }

  // One point per candidate: worst first-set entry count versus mean
  // second-set entry count on that candidate's compliant database.
  std::vector<std::size_t> first_points, second_points;
  std::vector<double> mean_curve;
  double mean_second = 0.0;
  std::size_t total_second_vectors = 0;
  for (std::size_t candidate : candidates) {
    std::vector<FeatureVector> first_set, second_set;
    for (std::size_t j = 0; j < features.persons[candidate].samples.size(); ++j) {
      if (j < t_first)
        first_set.push_back(features.persons[candidate].samples[j]);
      else
        second_set.push_back(features.persons[candidate].samples[j]);
    }
    SeedSearchConfig candidate_cfg = cfg;
    candidate_cfg.rng_seed = derive_seed(cfg.rng_seed, 0xC0DE0000 + candidate);
    const CompliantBuild build = build_compliant_database(
        first_set, features, target_sample, candidate, candidate_cfg);
    const SecondSetReport sets = second_set_evaluation(first_set, second_set, build.db);

    std::size_t worst_first = sets.first_counts.empty() ? 0 : sets.first_counts[0];
    for (std::size_t c : sets.first_counts) worst_first = std::min(worst_first, c);
    std::size_t second_sum = 0;
    for (std::size_t c : sets.second_counts) second_sum += c;
    first_points.push_back(worst_first);
    second_points.push_back(
        sets.second_counts.empty() ? 0 : second_sum / sets.second_counts.size());
    mean_second += static_cast<double>(second_sum);
    total_second_vectors += sets.second_counts.size();

    if (mean_curve.empty()) mean_curve.assign(sets.second_curve.size(), 0.0);
    for (std::size_t k = 0; k < sets.second_curve.size() && k < mean_curve.size(); ++k)
      mean_curve[k] += sets.second_curve[k];
  }
  for (double& v : mean_curve) v /= static_cast<double>(candidates.size());

  ExperimentReport report;
  report.experiment = "second-set";
  report.config["features"] = features_path;
  report.config["t_first"] = std::to_string(t_first);
  report.config["target_sample"] = std::to_string(target_sample);
  report.config["family"] = std::string(family_name(cfg.transform.family));
  report.config["m"] = std::to_string(cfg.transform.output_dim);
  report.config["binarize"] = cfg.transform.binarize ? "true" : "false";
  report.config["tau_b"] = std::to_string(cfg.tau_b);
  report.config["seed"] = seed_hex;
  report.metrics["candidates"] = static_cast<double>(candidates.size());
  report.metrics["mean_second_set_matches"] =
      total_second_vectors == 0 ? 0.0
                                : mean_second / static_cast<double>(total_second_vectors);

  std::vector<std::pair<double, double>> curve_series;
  for (std::size_t k = 0; k < mean_curve.size(); ++k)
    curve_series.push_back({static_cast<double>(k), mean_curve[k]});
  report.series["second_set_curve"] = curve_series;

  if (candidates.size() >= 2) {
    bool constant = true;
    for (std::size_t v : first_points)
      if (v != first_points.front()) constant = false;
    if (!constant) {
      const LinearFit fit = correlation_first_second(first_points, second_points);
      report.metrics["slope"] = fit.slope;
      report.metrics["intercept"] = fit.intercept;
      report.metrics["pearson_r"] = fit.r;
    }
  }
  if (!csv_path.empty())
    write_series_csv(csv_path, "k", "fraction_matching_at_least_k", curve_series);
  common.emit(report);
  return 0;
}

int cmd_theory(unsigned m, double tau, unsigned n, double eps, const CommonOut& common) {
  const TrialEstimate est = expected_trials(m, tau, n, eps);
  std::cout << "p = " << est.numerator.to_decimal_string() << "/2^" << est.denom_log2
            << " = " << est.p << "\n";
  std::cout << "scenario 1 (epsilon-cover search): expected trials = p^(-eps*n)";
  if (std::isinf(est.trials_scenario1))
    std::cout << " ~ 10^" << est.log10_trials_scenario1 << "\n";
  else
    std::cout << " = " << est.trials_scenario1 << "\n";
  std::cout << "scenario 2 (compliant seeds): expected trials = n/p = "
            << est.trials_scenario2 << "\n";

  ExperimentReport report;
  report.experiment = "theory";
  report.config["m"] = std::to_string(m);
  report.config["tau"] = std::to_string(tau);
  report.config["n"] = std::to_string(n);
  report.config["epsilon"] = std::to_string(eps);
  report.config["p_exact"] = est.numerator.to_decimal_string() + "/2^" +
                             std::to_string(est.denom_log2);
  report.metrics["p"] = est.p;
  report.metrics["log10_p"] = est.log10_p;
  report.metrics["log10_trials_scenario1"] = est.log10_trials_scenario1;
  report.metrics["trials_scenario2"] = est.trials_scenario2;
  report.metrics["log10_trials_scenario2"] = est.log10_trials_scenario2;
  common.emit(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bmk: cancelable biometric transformations and masterkey search"};
  app.set_version_flag("--version", std::string(bmk::kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // --threads / --report may follow the subcommand

  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = BMK_THREADS or hardware)");

  CommonOut common;

  try {
    // gen-db
    auto* gen = app.add_subcommand("gen-db", "Generate a synthetic feature database");
    std::string gen_out;
    std::size_t gen_n = 100, gen_t = 8, gen_dim = 512;
    double gen_intra = 1.0, gen_inter = 1.0;
    std::optional<double> gen_tune;
    std::string gen_seed = kDefaultSeedHex;
    gen->add_option("--out", gen_out, "Output path (.csv or .fvdb)")->required();
    gen->add_option("--n", gen_n, "Persons");
    gen->add_option("--t", gen_t, "Samples per person");
    gen->add_option("--dim", gen_dim, "Feature dimension N");
    gen->add_option("--intra-sigma", gen_intra, "Within-person noise stddev");
    gen->add_option("--inter-scale", gen_inter, "Person centroid spread");
    gen->add_option("--tune-raw-eer", gen_tune,
                    "Pick intra-sigma so the raw EER hits this value");
    gen->add_option("--seed", gen_seed, "32-hex-char generation seed");

    // enroll
    auto* enr = app.add_subcommand("enroll", "Build a cancelable database");
    std::string enr_features, enr_out, enr_seed = kDefaultSeedHex;
    TransformFlags enr_tf;
    std::optional<double> enr_tau;
    bool enr_all = false;
    enr->add_option("--features", enr_features, "Feature database")->required();
    enr->add_option("--out", enr_out, "Output cancelable database (JSON)")->required();
    enr_tf.attach(enr);
    enr->add_option("--tau", enr_tau, "Decision threshold (default: the EER threshold)");
    enr->add_flag("--all-samples", enr_all, "Enroll every sample, not just the first");
    enr->add_option("--seed", enr_seed, "Seed for per-person enrollment seeds");

    // eval-eer
    auto* eer = app.add_subcommand("eval-eer", "EER of a feature or cancelable database");
    std::string eer_features, eer_cancelable, eer_metric, eer_roc;
    eer->add_option("--features", eer_features, "Feature database")->required();
    eer->add_option("--cancelable", eer_cancelable, "Cancelable database (JSON)");
    eer->add_option("--metric", eer_metric, "euclidean or hamming")
        ->check(CLI::IsMember({"euclidean", "hamming", ""}));
    eer->add_option("--roc", eer_roc, "Write the FMR sweep as CSV");

    // jl-epsilon
    auto* jle = app.add_subcommand("jl-epsilon", "Distortion estimate across template sizes");
    std::string jle_features, jle_mlist = "32,64,128,256", jle_families = "gs,jl1,jl2";
    std::string jle_seed = kDefaultSeedHex, jle_csv;
    std::size_t jle_random = 0, jle_dim = 512;
    jle->add_option("--features", jle_features, "Feature database (first samples used)");
    jle->add_option("--random", jle_random, "Use this many random vectors instead");
    jle->add_option("--dim", jle_dim, "Dimension for --random");
    jle->add_option("--m-list", jle_mlist, "Comma-separated template sizes");
    jle->add_option("--families", jle_families, "Subset of gs,jl1,jl2");
    jle->add_option("--seed", jle_seed, "Projection seed");
    jle->add_option("--csv", jle_csv, "CSV path prefix per family");

    // ga-masterkey / dictionary / ocp-table
    std::string ga_cancelable, ga_trace, ga_mk_out, ga_seed = kDefaultSeedHex;
    std::size_t ga_pop = 200, ga_iters = 500;
    std::string ga_fitness = "sum";
    double ga_select = 0.25, ga_mut_rate = 0.05, ga_mut_sigma = 0.1;

    auto* ga = app.add_subcommand("ga-masterkey", "Genetic masterkey search");
    ga->add_option("--cancelable", ga_cancelable, "Cancelable database")->required();
    ga->add_option("--pop", ga_pop, "Population size");
    ga->add_option("--iters", ga_iters, "Iterations");
    ga->add_option("--fitness", ga_fitness, "sum or avgmin")
        ->check(CLI::IsMember({"sum", "avgmin"}));
    ga->add_option("--selection-fraction", ga_select, "Kept fraction per generation");
    ga->add_option("--mutation-rate", ga_mut_rate, "Per-coordinate mutation probability");
    ga->add_option("--mutation-sigma", ga_mut_sigma, "Mutation noise scale");
    ga->add_option("--seed", ga_seed, "GA random seed");
    ga->add_option("--trace", ga_trace, "Write per-iteration trace CSV");
    ga->add_option("--masterkey-out", ga_mk_out, "Write the masterkey as a feature CSV");

    auto* dict = app.add_subcommand("dictionary", "Greedy masterkey dictionary (ODS)");
    std::string dict_cancelable, dict_out, dict_seed = kDefaultSeedHex;
    std::size_t dict_pop = 200, dict_iters = 500;
    std::string dict_fitness = "sum";
    dict->add_option("--cancelable", dict_cancelable, "Cancelable database")->required();
    dict->add_option("--pop", dict_pop, "Population size");
    dict->add_option("--iters", dict_iters, "Iterations per round");
    dict->add_option("--fitness", dict_fitness, "sum or avgmin")
        ->check(CLI::IsMember({"sum", "avgmin"}));
    dict->add_option("--seed", dict_seed, "GA random seed");
    dict->add_option("--masterkeys-out", dict_out, "Write dictionary vectors as CSV");

    auto* ocp = app.add_subcommand("ocp-table", "Coverage versus threshold table");
    std::string ocp_cancelable, ocp_features, ocp_thresholds, ocp_csv;
    std::string ocp_seed = kDefaultSeedHex;
    std::size_t ocp_pop = 200, ocp_iters = 500;
    ocp->add_option("--cancelable", ocp_cancelable, "Cancelable database")->required();
    ocp->add_option("--features", ocp_features, "Feature database (for FMR)")->required();
    ocp->add_option("--thresholds", ocp_thresholds, "Comma-separated tau values")
        ->required();
    ocp->add_option("--pop", ocp_pop, "Population size");
    ocp->add_option("--iters", ocp_iters, "Iterations per threshold");
    ocp->add_option("--seed", ocp_seed, "GA random seed");
    ocp->add_option("--csv", ocp_csv, "Write tau_b,fmr,ocp rows");

    // seed-search
    auto* sse = app.add_subcommand("seed-search", "Per-person seed search for a fixed masterkey");
    std::string sse_features, sse_out, sse_outcomes, sse_first = "0";
    std::string sse_seed = kDefaultSeedHex;
    std::size_t sse_person = 0, sse_sample = 0, sse_tfirst = 0;
    TransformFlags sse_tf;
    std::optional<double> sse_tau;
    std::optional<std::uint64_t> sse_cmax;
    std::optional<double> sse_budget;
    sse->add_option("--features", sse_features, "Feature database")->required();
    sse->add_option("--person", sse_person, "Masterkey candidate person index");
    sse->add_option("--t-first", sse_tfirst,
                    "Enroll the candidate's first T samples jointly");
    sse->add_option("--first-set", sse_first,
                    "Explicit candidate sample indices (e.g. 0,1,2,3)")
        ->excludes("--t-first");
    sse->add_option("--sample", sse_sample, "Target sample index j");
    sse_tf.attach(sse);
    sse->add_option("--tau", sse_tau, "Threshold (default: EER of a random-seed enrollment)");
    sse->add_option("--c-max", sse_cmax, "Trial cap per person");
    sse->add_option("--time-budget", sse_budget,
                    "Wall-clock budget per person, milliseconds");
    sse->add_option("--seed", sse_seed, "Candidate stream seed");
    sse->add_option("--out", sse_out, "Write the compliant database (JSON)");
    sse->add_option("--outcomes", sse_outcomes, "Write per-person outcome CSV");

    // second-set
    auto* sec = app.add_subcommand("second-set", "Held-out coverage of compliant databases");
    std::string sec_features, sec_csv, sec_seed = kDefaultSeedHex;
    std::optional<std::size_t> sec_person;
    std::size_t sec_tfirst = 1, sec_sample = 0;
    TransformFlags sec_tf;
    std::optional<double> sec_tau;
    std::optional<std::uint64_t> sec_cmax;
    std::optional<double> sec_budget;
    sec->add_option("--features", sec_features, "Feature database")->required();
    sec->add_option("--person", sec_person, "Single candidate (default: all persons)");
    sec->add_option("--t-first", sec_tfirst, "First-set size T");
    sec->add_option("--sample", sec_sample, "Target sample index j");
    sec_tf.attach(sec);
    sec->add_option("--tau", sec_tau, "Threshold (default: EER of a random-seed enrollment)");
    sec->add_option("--c-max", sec_cmax, "Trial cap per person");
    sec->add_option("--time-budget", sec_budget,
                    "Wall-clock budget per person, milliseconds");
    sec->add_option("--seed", sec_seed, "Candidate stream seed");
    sec->add_option("--csv", sec_csv, "Write the mean second-set curve as CSV");

    // theory
    auto* thy = app.add_subcommand("theory", "Closed-form trial-count calculator");
    unsigned thy_m = 128, thy_n = 100;
    double thy_tau = 17.0, thy_eps = 1.0;
    thy->add_option("--m", thy_m, "Template length M");
    thy->add_option("--tau", thy_tau, "Threshold tau");
    thy->add_option("--n", thy_n, "Database size n");
    thy->add_option("--epsilon", thy_eps, "Coverage fraction for scenario 1");

    app.add_option("--report", common.report_path,
                   "Write the experiment report JSON here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed())
      return cmd_gen_db(gen_out, gen_n, gen_t, gen_dim, gen_intra, gen_inter, gen_tune,
                        gen_seed, common);
    if (enr->parsed())
      return cmd_enroll(enr_features, enr_out, enr_tf, enr_tau, enr_all, enr_seed,
                        threads, common);
    if (eer->parsed())
      return cmd_eval_eer(eer_features, eer_cancelable, eer_metric, eer_roc, threads,
                          common);
    if (jle->parsed())
      return cmd_jl_epsilon(jle_features, jle_random, jle_dim, jle_mlist, jle_families,
                            jle_seed, jle_csv, common);
    if (ga->parsed())
      return cmd_ga_masterkey(ga_cancelable,
                              make_ga_config(ga_pop, ga_iters, ga_fitness, ga_select,
                                             ga_mut_rate, ga_mut_sigma, ga_seed, threads),
                              ga_trace, ga_mk_out, common);
    if (dict->parsed())
      return cmd_dictionary(dict_cancelable,
                            make_ga_config(dict_pop, dict_iters, dict_fitness, 0.25,
                                           0.05, 0.1, dict_seed, threads),
                            dict_out, common);
    if (ocp->parsed())
      return cmd_ocp_table(ocp_cancelable, ocp_features, ocp_thresholds,
                           make_ga_config(ocp_pop, ocp_iters, "sum", 0.25, 0.05, 0.1,
                                          ocp_seed, threads),
                           ocp_csv, common);
    if (sse->parsed())
      return cmd_seed_search(sse_features, sse_person, sse_tfirst, sse_first,
                             sse_sample, sse_tf, sse_tau, sse_cmax, sse_budget,
                             sse_seed, threads, sse_out, sse_outcomes, common);
    if (sec->parsed())
      return cmd_second_set(sec_features, sec_person, sec_tfirst, sec_sample, sec_tf,
                            sec_tau, sec_cmax, sec_budget, sec_seed, threads, sec_csv,
                            common);
    if (thy->parsed()) return cmd_theory(thy_m, thy_tau, thy_n, thy_eps, common);

    std::cerr << app.help() << "\n";
    return 2;
  } catch (const bmk::error& e) {
    std::cerr << "{\"error\":{\"type\":\"bmk\",\"message\":\"" << e.what() << "\"}}\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":{\"type\":\"internal\",\"message\":\"" << e.what()
              << "\"}}\n";
    return 1;
  }
}
