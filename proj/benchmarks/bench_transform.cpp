// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <benchmark/benchmark.h>

#include "bmk/seed_stream.hpp"
#include "bmk/transform.hpp"

namespace {

using namespace bmk;

FeatureVector make_vector(std::size_t dim) {
  SeedStream stream(Seed{7, 7});
  NormalSampler normals(stream);
  FeatureVector x;
  x.values.resize(dim);
  for (double& v : x.values) v = normals.next();
  return x;
}

TransformConfig make_config(MatrixFamily family, std::size_t m) {
  TransformConfig config;
  config.family = family;
  config.input_dim = 512;
  config.output_dim = m;
  config.binarize = true;
  return config;
}

void MatrixGeneration(benchmark::State& state, MatrixFamily family) {
  const TransformConfig config = make_config(family, state.range(0));
  std::uint64_t salt = 0;
  for (auto _ : state) {
    const ProjectionMatrix matrix = generate_matrix(Seed{1, ++salt}, config);
    benchmark::DoNotOptimize(matrix.coefficients().data());
  }
}
BENCHMARK_CAPTURE(MatrixGeneration, jl1, MatrixFamily::JL1)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(MatrixGeneration, jl2, MatrixFamily::JL2)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(MatrixGeneration, gram_schmidt, MatrixFamily::GramSchmidt)
    ->Arg(64)
    ->Arg(128);

void TransformFromSeed(benchmark::State& state, MatrixFamily family) {
  const TransformConfig config = make_config(family, state.range(0));
  const FeatureVector x = make_vector(512);
  std::uint64_t salt = 0;
  for (auto _ : state) {
    const Template t = transform(Seed{9, ++salt}, x, config);
    benchmark::DoNotOptimize(&t);
  }
}
BENCHMARK_CAPTURE(TransformFromSeed, jl2, MatrixFamily::JL2)->Arg(128);
BENCHMARK_CAPTURE(TransformFromSeed, gram_schmidt, MatrixFamily::GramSchmidt)->Arg(128);

void TransformCachedMatrix(benchmark::State& state) {
  const TransformConfig config = make_config(MatrixFamily::JL2, state.range(0));
  const ProjectionMatrix matrix = generate_matrix(Seed{3, 3}, config);
  const FeatureVector x = make_vector(512);
  for (auto _ : state) {
    const Template t = transform_with_matrix(matrix, x);
    benchmark::DoNotOptimize(&t);
  }
}
BENCHMARK(TransformCachedMatrix)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
