// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <benchmark/benchmark.h>

#include "bmk/eval.hpp"
#include "bmk/seed_stream.hpp"

namespace {

using namespace bmk;

BinaryTemplate random_template(Seed seed, std::size_t m) {
  SeedStream stream(seed);
  BinaryTemplate t(m);
  for (std::size_t i = 0; i < m; ++i) t.set_bit(i, stream.next_unit() < 0.5);
  return t;
}

void HammingPacked(benchmark::State& state) {
  const std::size_t m = state.range(0);
  const BinaryTemplate u = random_template(Seed{1, 2}, m);
  const BinaryTemplate v = random_template(Seed{3, 4}, m);
  for (auto _ : state) benchmark::DoNotOptimize(hamming_distance(u, v));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(HammingPacked)->Arg(128)->Arg(512)->Arg(4096);

void EuclideanDistance(benchmark::State& state) {
  SeedStream stream(Seed{5, 6});
  NormalSampler normals(stream);
  FeatureVector x, y;
  x.values.resize(state.range(0));
  y.values.resize(state.range(0));
  for (double& v : x.values) v = normals.next();
  for (double& v : y.values) v = normals.next();
  for (auto _ : state) benchmark::DoNotOptimize(euclidean_distance(x, y));
}
BENCHMARK(EuclideanDistance)->Arg(128)->Arg(512);

}  // namespace
