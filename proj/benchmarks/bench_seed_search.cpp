// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <benchmark/benchmark.h>

#include "bmk/seed_search.hpp"
#include "bmk/seed_stream.hpp"

namespace {

using namespace bmk;

FeatureVector make_vector(Seed seed, std::size_t dim) {
  SeedStream stream(seed);
  NormalSampler normals(stream);
  FeatureVector x;
  x.values.resize(dim);
  for (double& v : x.values) v = normals.next();
  return x;
}

// Throughput of the per-candidate trial loop (transform both sides, compare).
void SeedSearchTrials(benchmark::State& state) {
  SeedSearchConfig cfg;
  cfg.c_max = 256;  // never found at this threshold; measures pure trial cost
  cfg.tau_b = 0.5;
  cfg.transform.family = MatrixFamily::JL2;
  cfg.transform.input_dim = 512;
  cfg.transform.output_dim = state.range(0);
  cfg.transform.binarize = true;
  cfg.rng_seed = Seed{11, 22};

  const FeatureVector masterkey = make_vector(Seed{1, 1}, 512);
  const FeatureVector target = make_vector(Seed{2, 2}, 512);
  for (auto _ : state) {
    const SeedOutcome outcome =
        find_seed(std::vector<FeatureVector>{masterkey}, target, cfg);
    benchmark::DoNotOptimize(&outcome);
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(SeedSearchTrials)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
