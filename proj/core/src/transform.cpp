// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/transform.hpp"

#include <cmath>
#include <utility>

#include "bmk/errors.hpp"

namespace bmk {

namespace {

// Coefficient laws share one stream word per coefficient; the top 53 bits are
// read as a uniform double u in [0, 1).
//   JL1: +1/sqrt(M) when u < 1/2, else -1/sqrt(M)
//   JL2: +sqrt(3/M) when u < 1/6, -sqrt(3/M) when u >= 5/6, else 0
double draw_jl1(SeedStream& stream, double magnitude) {
  return stream.next_unit() < 0.5 ? magnitude : -magnitude;
}

double draw_jl2(SeedStream& stream, double magnitude) {
  const double u = stream.next_unit();
  if (u < 1.0 / 6.0) return magnitude;
  if (u >= 5.0 / 6.0) return -magnitude;
  return 0.0;
}

void check_input(const FeatureVector& x, const TransformConfig& config) {
  if (x.size() != config.input_dim)
    throw dimension_error("feature vector has dimension " + std::to_string(x.size()) +
                          ", transform expects " + std::to_string(config.input_dim));
  if (!all_finite(x)) throw input_error("feature vector contains a non-finite value");
}

}  // namespace

ProjectionMatrix::ProjectionMatrix(TransformConfig config, Seed seed,
                                   std::vector<double> coefficients)
    : config_(std::move(config)), seed_(seed), coefficients_(std::move(coefficients)) {}

std::vector<double> ProjectionMatrix::apply(const FeatureVector& x) const {
  check_input(x, config_);
  const std::size_t n = config_.input_dim;
  const std::size_t m = config_.output_dim;
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double* col = coefficients_.data() + j * n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x.values[i] * col[i];
    out[j] = acc;
  }
  return out;
}

void orthonormalize_columns(std::vector<double>& columns, std::size_t rows,
                            std::size_t cols, double degeneracy_threshold) {
  for (std::size_t j = 0; j < cols; ++j) {
    double* col_j = columns.data() + j * rows;
    for (std::size_t k = 0; k < j; ++k) {
      const double* col_k = columns.data() + k * rows;
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) dot += col_k[i] * col_j[i];
      for (std::size_t i = 0; i < rows; ++i) col_j[i] -= dot * col_k[i];
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm_sq += col_j[i] * col_j[i];
    const double norm = std::sqrt(norm_sq);
    if (norm < degeneracy_threshold)
      throw degenerate_matrix_error("column " + std::to_string(j) +
                                    " became numerically dependent during "
                                    "orthonormalization (norm " +
                                    std::to_string(norm) + ")");
    const double inv = 1.0 / norm;
    for (std::size_t i = 0; i < rows; ++i) col_j[i] *= inv;
  }
}

ProjectionMatrix generate_matrix(Seed seed, const TransformConfig& config) {
  validate_config(config);
  const std::size_t n = config.input_dim;
  const std::size_t m = config.output_dim;
  std::vector<double> coeffs(n * m);
  SeedStream stream(seed);

  switch (config.family) {
    case MatrixFamily::JL1: {
      const double magnitude = 1.0 / std::sqrt(static_cast<double>(m));
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
          coeffs[j * n + i] = draw_jl1(stream, magnitude);
      break;
    }
    case MatrixFamily::JL2: {
      const double magnitude = std::sqrt(3.0 / static_cast<double>(m));
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
          coeffs[j * n + i] = draw_jl2(stream, magnitude);
      break;
    }
    case MatrixFamily::GramSchmidt: {
      NormalSampler normals(stream);
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) coeffs[j * n + i] = normals.next();
        normals.discard_pair();  // columns start on a fresh Box-Muller pair
      }
      orthonormalize_columns(coeffs, n, m);
      break;
    }
  }
  return ProjectionMatrix(config, seed, std::move(coeffs));
}

BinaryTemplate binarize(std::span<const double> t) {
  BinaryTemplate out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]))
      throw input_error("binarize input has a non-finite entry at index " +
                        std::to_string(i));
    if (t[i] >= 0.0) out.set_bit(i, true);
  }
  return out;
}

Template transform_with_matrix(const ProjectionMatrix& matrix, const FeatureVector& x) {
  std::vector<double> projected = matrix.apply(x);
  if (matrix.config().binarize) return binarize(projected);
  return RealTemplate{std::move(projected)};
}

std::vector<Template> transform_many(Seed seed, std::span<const FeatureVector> xs,
                                     const TransformConfig& config) {
  validate_config(config);
  for (const FeatureVector& x : xs) check_input(x, config);

  if (config.family == MatrixFamily::GramSchmidt) {
    // Orthonormalization needs the whole matrix anyway.
    const ProjectionMatrix matrix = generate_matrix(seed, config);
    std::vector<Template> out;
    out.reserve(xs.size());
    for (const FeatureVector& x : xs) out.push_back(transform_with_matrix(matrix, x));
    return out;
  }

  // JL coefficients are streamed in draw order and folded into every target's
  // accumulator immediately; nothing is materialized. The accumulation order
  // per target matches ProjectionMatrix::apply term for term, so results are
  // bit-identical to the matrix path.
  const std::size_t n = config.input_dim;
  const std::size_t m = config.output_dim;
  SeedStream stream(seed);
  const double magnitude = config.family == MatrixFamily::JL1
                               ? 1.0 / std::sqrt(static_cast<double>(m))
                               : std::sqrt(3.0 / static_cast<double>(m));
  std::vector<std::vector<double>> projected(xs.size(), std::vector<double>(m));
  std::vector<double> acc(xs.size());
  for (std::size_t j = 0; j < m; ++j) {
    for (double& a : acc) a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = config.family == MatrixFamily::JL1 ? draw_jl1(stream, magnitude)
                                                          : draw_jl2(stream, magnitude);
      if (c == 0.0) continue;
      for (std::size_t v = 0; v < xs.size(); ++v) acc[v] += xs[v].values[i] * c;
    }
    for (std::size_t v = 0; v < xs.size(); ++v) projected[v][j] = acc[v];
  }

  std::vector<Template> out;
  out.reserve(xs.size());
  for (std::size_t v = 0; v < xs.size(); ++v) {
    if (config.binarize)
      out.push_back(binarize(projected[v]));
    else
      out.push_back(RealTemplate{std::move(projected[v])});
  }
  return out;
}

Template transform(Seed seed, const FeatureVector& x, const TransformConfig& config) {
  return std::move(transform_many(seed, std::span<const FeatureVector>(&x, 1), config)[0]);
}

}  // namespace bmk
