// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bmk/eval.hpp"
#include "bmk/ga_masterkey.hpp"
#include "bmk/io.hpp"
#include "bmk/seed_search.hpp"
#include "bmk/theory.hpp"
#include "test_support.hpp"

using namespace bmk;
using bmk::testing::random_vector;

TEST_SUITE_BEGIN("seed_search");

namespace {

SeedSearchConfig make_cfg(std::size_t n, std::size_t m, double tau,
                          std::uint64_t c_max = 10000) {
  SeedSearchConfig cfg;
  cfg.c_max = c_max;
  cfg.tau_b = tau;
  cfg.transform.family = MatrixFamily::JL2;
  cfg.transform.input_dim = n;
  cfg.transform.output_dim = m;
  cfg.transform.binarize = true;
  cfg.rng_seed = Seed{1111, 2222};
  return cfg;
}

}  // namespace

TEST_CASE("the target itself is found on the first trial") {
  SeedStream stream(Seed{1, 61});
  const FeatureVector x = random_vector(stream, 64);
  const SeedOutcome outcome = find_seed(std::vector<FeatureVector>{x}, x, make_cfg(64, 32, 1.0));
  CHECK(outcome.status == SeedOutcomeStatus::Found);
  CHECK(outcome.trials == 1);
  CHECK(outcome.worst_distance == 0.0);
}

TEST_CASE("a zero trial cap fails immediately with zero trials") {
  SeedStream stream(Seed{2, 62});
  const FeatureVector x = random_vector(stream, 64);
  const FeatureVector y = random_vector(stream, 64);
  const SeedOutcome outcome =
      find_seed(std::vector<FeatureVector>{x}, y, make_cfg(64, 32, 10.0, 0));
  CHECK(outcome.status == SeedOutcomeStatus::Failure);
  CHECK(outcome.trials == 0);
}

TEST_CASE("configuration demands a limit and a positive threshold") {
  SeedStream stream(Seed{3, 63});
  const FeatureVector x = random_vector(stream, 16);
  SeedSearchConfig cfg = make_cfg(16, 8, 2.0);
  cfg.c_max.reset();
  CHECK_THROWS_AS(find_seed(std::vector<FeatureVector>{x}, x, cfg), config_error);
  cfg.c_max = 10;
  cfg.tau_b = 0.0;
  CHECK_THROWS_AS(find_seed(std::vector<FeatureVector>{x}, x, cfg), config_error);
  cfg.tau_b = 1.0;
  CHECK_THROWS_AS(find_seed(std::vector<FeatureVector>{}, x, cfg), input_error);
  CHECK_THROWS_AS(
      find_seed(std::vector<FeatureVector>{random_vector(stream, 8)}, x, cfg),
      dimension_error);
}

TEST_CASE("found seeds re-verify and failures report their trial spend") {
  SeedStream stream(Seed{4, 64});
  const FeatureVector target = random_vector(stream, 128);
  const FeatureVector masterkey = random_vector(stream, 128);
  // tau at 40% of M makes random 128-d pairs findable within a modest cap.
  SeedSearchConfig cfg = make_cfg(128, 32, 12.0, 50000);

  const SeedOutcome outcome = find_seed(std::vector<FeatureVector>{masterkey}, target, cfg);
  REQUIRE(outcome.status == SeedOutcomeStatus::Found);
  const Template mk = transform(outcome.seed, masterkey, cfg.transform);
  const Template tg = transform(outcome.seed, target, cfg.transform);
  CHECK(verify(mk, tg, cfg.tau_b));
  CHECK(template_distance(mk, tg) == doctest::Approx(outcome.worst_distance));

  // An unreachable threshold exhausts the cap.
  cfg.tau_b = 0.5;
  cfg.c_max = 25;
  const SeedOutcome failure = find_seed(std::vector<FeatureVector>{masterkey}, target, cfg);
  CHECK(failure.status == SeedOutcomeStatus::Failure);
  CHECK(failure.trials == 25);
}

TEST_CASE("multi-masterkey exhaustion falls back to the best worst-distance seed") {
  SeedStream stream(Seed{5, 65});
  const FeatureVector target = random_vector(stream, 64);
  const std::vector<FeatureVector> masterkeys = {random_vector(stream, 64),
                                                 random_vector(stream, 64)};
  SeedSearchConfig cfg = make_cfg(64, 32, 0.5, 40);  // only exact matches accepted

  const SeedOutcome outcome = find_seed(masterkeys, target, cfg);
  REQUIRE(outcome.status == SeedOutcomeStatus::Fallback);
  CHECK(outcome.trials == 40);

  // The recorded worst distance is recomputable.
  const Template tg = transform(outcome.seed, target, cfg.transform);
  double worst = 0.0;
  for (const FeatureVector& m : masterkeys)
    worst = std::max(worst, template_distance(transform(outcome.seed, m, cfg.transform), tg));
  CHECK(worst == doctest::Approx(outcome.worst_distance));

  // And it is minimal over the candidate stream actually visited.
  SeedStream candidates(cfg.rng_seed);
  double best_seen = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 40; ++i) {
    const Seed s = candidates.next_seed();
    const Template t2 = transform(s, target, cfg.transform);
    double w = 0.0;
    for (const FeatureVector& m : masterkeys)
      w = std::max(w, template_distance(transform(s, m, cfg.transform), t2));
    best_seen = std::min(best_seen, w);
  }
  CHECK(outcome.worst_distance == doctest::Approx(best_seen));
}

TEST_CASE("acceptance requires every masterkey under the same seed") {
  SeedStream stream(Seed{6, 66});
  const FeatureVector target = random_vector(stream, 64);
  std::vector<FeatureVector> masterkeys = {target, random_vector(stream, 64)};
  SeedSearchConfig cfg = make_cfg(64, 32, 6.0, 2000);

  const SeedOutcome outcome = find_seed(masterkeys, target, cfg);
  if (outcome.status == SeedOutcomeStatus::Found) {
    const Template tg = transform(outcome.seed, target, cfg.transform);
    for (const FeatureVector& m : masterkeys)
      CHECK(verify(transform(outcome.seed, m, cfg.transform), tg, cfg.tau_b));
  } else {
    CHECK(outcome.status == SeedOutcomeStatus::Fallback);
  }
}

TEST_CASE("compliant build over a single excluded person is vacuous") {
  SyntheticDbSpec spec{1, 2, 32, 0.1, 1.0, Seed{81, 2}};
  const FeatureDatabase features = generate_synthetic_db(spec);
  SeedStream stream(Seed{7, 67});
  const std::vector<FeatureVector> masterkeys = {features.persons[0].samples[0]};

  const CompliantBuild build =
      build_compliant_database(masterkeys, features, 0, std::size_t{0}, make_cfg(32, 16, 4.0));
  CHECK(build.db.entries.empty());
  CHECK(build.result.outcomes.empty());
  CHECK(build.result.success_fraction == 1.0);
}

TEST_CASE("compliant database makes the candidate a masterkey") {
  SyntheticDbSpec spec;
  spec.persons = 12;
  spec.samples_per_person = 2;
  spec.dimension = 128;
  spec.inter_scale = 1.0;
  spec.intra_sigma = 2.0;  // overlapping persons, EER well off zero
  spec.rng_seed = Seed{91, 3};
  const FeatureDatabase features = generate_synthetic_db(spec);

  SeedSearchConfig cfg = make_cfg(128, 64, 26.0, 200000);
  const std::size_t candidate = 4;
  const std::vector<FeatureVector> masterkeys = {features.persons[candidate].samples[0]};

  const CompliantBuild build =
      build_compliant_database(masterkeys, features, 0, candidate, cfg);
  REQUIRE(build.result.outcomes.size() == 11);
  CHECK(build.result.success_fraction == 1.0);
  CHECK(build.db.entries.size() == 11);
  CHECK(build.result.total_trials >= 11);

  // Definition of a masterkey, re-checked via coverage.
  const CoverageReport report = masterkey_coverage(masterkeys[0], build.db);
  CHECK(report.coverage == doctest::Approx(1.0));

  // Every reported outcome re-verifies.
  for (const PersonOutcome& po : build.result.outcomes) {
    REQUIRE(po.outcome.status == SeedOutcomeStatus::Found);
    CHECK(po.outcome.trials >= 1);
  }
}

TEST_CASE("compliant build is deterministic for any thread count") {
  SyntheticDbSpec spec{8, 1, 64, 1.0, 1.0, Seed{95, 5}};
  const FeatureDatabase features = generate_synthetic_db(spec);
  const std::vector<FeatureVector> masterkeys = {features.persons[0].samples[0]};

  SeedSearchConfig cfg = make_cfg(64, 32, 11.0, 100000);
  cfg.threads = 1;
  const CompliantBuild a = build_compliant_database(masterkeys, features, 0, std::size_t{0}, cfg);
  cfg.threads = 4;
  const CompliantBuild b = build_compliant_database(masterkeys, features, 0, std::size_t{0}, cfg);

  REQUIRE(a.result.outcomes.size() == b.result.outcomes.size());
  for (std::size_t i = 0; i < a.result.outcomes.size(); ++i) {
    CHECK(a.result.outcomes[i].outcome.seed == b.result.outcomes[i].outcome.seed);
    CHECK(a.result.outcomes[i].outcome.trials == b.result.outcomes[i].outcome.trials);
    CHECK(a.result.outcomes[i].outcome.status == b.result.outcomes[i].outcome.status);
  }
  CHECK(a.result.total_trials == b.result.total_trials);
}

TEST_CASE("failed persons are omitted from the database but reported") {
  SyntheticDbSpec spec{4, 1, 32, 1.0, 1.0, Seed{97, 1}};
  const FeatureDatabase features = generate_synthetic_db(spec);
  const std::vector<FeatureVector> masterkeys = {features.persons[0].samples[0]};

  SeedSearchConfig cfg = make_cfg(32, 16, 0.5, 10);  // unreachable: exact match only
  const CompliantBuild build =
      build_compliant_database(masterkeys, features, 0, std::size_t{0}, cfg);
  CHECK(build.result.outcomes.size() == 3);
  CHECK(build.db.entries.empty());
  CHECK(build.result.success_fraction == 0.0);
  for (const PersonOutcome& po : build.result.outcomes)
    CHECK(po.outcome.status == SeedOutcomeStatus::Failure);
}

TEST_CASE("second-set evaluation counts matches and builds curves") {
  SyntheticDbSpec spec{6, 3, 64, 0.15, 1.0, Seed{99, 9}};
  const FeatureDatabase features = generate_synthetic_db(spec);
  const std::size_t candidate = 2;
  const std::vector<FeatureVector> first = {features.persons[candidate].samples[0]};
  const std::vector<FeatureVector> second = {features.persons[candidate].samples[1],
                                             features.persons[candidate].samples[2],
                                             features.persons[candidate].samples[0]};

  SeedSearchConfig cfg = make_cfg(64, 32, 10.0, 100000);
  const CompliantBuild build =
      build_compliant_database(first, features, 0, candidate, cfg);
  REQUIRE(build.result.success_fraction == 1.0);

  const SecondSetReport report = second_set_evaluation(first, second, build.db);
  REQUIRE(report.first_counts.size() == 1);
  // All Found means the first-set vector matches every entry.
  CHECK(report.first_counts[0] == build.db.entries.size());
  CHECK(report.first_curve.front() == doctest::Approx(1.0));
  CHECK(report.first_curve.back() == doctest::Approx(1.0));

  // A second-set vector identical to the first-set one matches identically.
  CHECK(report.second_counts[2] == report.first_counts[0]);
  // Curves are non-increasing in k.
  for (std::size_t k = 1; k < report.second_curve.size(); ++k)
    REQUIRE(report.second_curve[k] <= report.second_curve[k - 1]);
}

TEST_CASE("correlation on an exact line") {
  const std::vector<std::size_t> first = {0, 1, 2};
  const std::vector<std::size_t> second = {1, 3, 5};
  const LinearFit fit = correlation_first_second(first, second);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r == doctest::Approx(1.0));
}

TEST_CASE("constant second set gives zero slope and zero correlation") {
  const std::vector<std::size_t> first = {0, 1, 2, 3};
  const std::vector<std::size_t> second = {4, 4, 4, 4};
  const LinearFit fit = correlation_first_second(first, second);
  CHECK(fit.slope == doctest::Approx(0.0));
  CHECK(fit.r == doctest::Approx(0.0));
}

TEST_CASE("degenerate first set is rejected") {
  const std::vector<std::size_t> first = {2, 2, 2};
  const std::vector<std::size_t> second = {1, 2, 3};
  CHECK_THROWS_AS(correlation_first_second(first, second), input_error);
  const std::vector<std::size_t> empty;
  CHECK_THROWS_AS(correlation_first_second(empty, empty), input_error);
}

TEST_CASE("euclidean mode runs the same loop on real templates") {
  SyntheticDbSpec spec{8, 2, 64, 0.6, 1.0, Seed{93, 12}};
  const FeatureDatabase features = generate_synthetic_db(spec);

  SeedSearchConfig cfg;
  cfg.c_max = 100000;
  cfg.transform.family = MatrixFamily::JL2;
  cfg.transform.input_dim = 64;
  cfg.transform.output_dim = 32;
  cfg.transform.binarize = false;
  cfg.rng_seed = Seed{41, 14};
  // Threshold at the Euclidean EER of a random-seed enrollment.
  const CancelableDatabase reference =
      enroll(features, cfg.transform, 0.0, Seed{17, 18});
  cfg.tau_b = compute_eer(collect_cancelable_scores(features, reference)).threshold;
  REQUIRE(cfg.tau_b > 0.0);

  const std::vector<FeatureVector> masterkeys = {features.persons[0].samples[0]};
  const CompliantBuild build =
      build_compliant_database(masterkeys, features, 0, std::size_t{0}, cfg);
  CHECK(build.result.success_fraction == 1.0);
  CHECK(!build.db.config.binarize);
  CHECK(masterkey_coverage(masterkeys[0], build.db).coverage == doctest::Approx(1.0));

  const SecondSetReport report = second_set_evaluation(
      masterkeys, std::vector<FeatureVector>{features.persons[0].samples[1]}, build.db);
  CHECK(report.first_counts[0] == build.db.entries.size());
}

TEST_CASE("mean trials over random pairs approach 1/p") {
  // Small-scale version of the trial-count law; the acceptance suite runs the
  // full 500-pair experiment.
  const TrialEstimate est = expected_trials(16, 4.0, 1, 1.0);
  SeedSearchConfig cfg = make_cfg(1024, 16, 4.0, 1000000);

  double total = 0.0;
  const std::size_t pairs = 120;
  for (std::size_t i = 0; i < pairs; ++i) {
    SeedStream stream(derive_seed(Seed{107, 11}, i));
    const FeatureVector masterkey = random_vector(stream, 1024);
    const FeatureVector target = random_vector(stream, 1024);
    cfg.rng_seed = derive_seed(Seed{109, 13}, i);
    const SeedOutcome outcome = find_seed(std::vector<FeatureVector>{masterkey}, target, cfg);
    REQUIRE(outcome.status == SeedOutcomeStatus::Found);
    total += static_cast<double>(outcome.trials);
  }
  const double mean = total / static_cast<double>(pairs);
  CHECK(mean / (1.0 / est.p) > 0.7);
  CHECK(mean / (1.0 / est.p) < 1.3);
}

TEST_SUITE_END();
