// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmk/seed_stream.hpp"
#include "bmk/types.hpp"

namespace bmk {

/// N x M projection matrix generated from a seed. Coefficients are stored
/// column-major; they are drawn column by column, row-ascending within each
/// column, so that two implementations of the same scheme agree bit-exactly.
class ProjectionMatrix {
 public:
  ProjectionMatrix(TransformConfig config, Seed seed, std::vector<double> coefficients);

  double at(std::size_t row, std::size_t col) const {
    return coefficients_[col * config_.input_dim + row];
  }
  std::span<const double> column(std::size_t col) const {
    return {coefficients_.data() + col * config_.input_dim, config_.input_dim};
  }
  const std::vector<double>& coefficients() const { return coefficients_; }
  const TransformConfig& config() const { return config_; }
  Seed seed() const { return seed_; }

  /// y = x * M_s (row vector times matrix), length M.
  std::vector<double> apply(const FeatureVector& x) const;

 private:
  TransformConfig config_;
  Seed seed_;
  std::vector<double> coefficients_;  // column-major, N*M
};

/// Deterministically generates the family-specific matrix for (seed, config).
///
/// JL1 coefficients are +-1/sqrt(M) with probability 1/2 each; JL2 coefficients
/// are +sqrt(3/M) w.p. 1/6, 0 w.p. 2/3, -sqrt(3/M) w.p. 1/6; both draw one
/// stream word per coefficient. GramSchmidt draws M standard-normal columns in
/// R^N (Box-Muller, pairs per column) and orthonormalizes them in column order.
///
/// Throws config_error for invalid configs and degenerate_matrix_error when a
/// column collapses during orthonormalization (norm < 1e-12 after projection);
/// callers regenerate with a seed derived from the failing one.
ProjectionMatrix generate_matrix(Seed seed, const TransformConfig& config);

/// In-place modified Gram-Schmidt over column-major data (n rows per column).
/// Throws degenerate_matrix_error when a column's residual norm falls under
/// the threshold.
void orthonormalize_columns(std::vector<double>& columns, std::size_t rows,
                            std::size_t cols, double degeneracy_threshold = 1e-12);

/// Sign binarization: bit i is 1 iff t[i] >= 0 (exact, no tolerance).
/// Throws input_error on non-finite entries.
BinaryTemplate binarize(std::span<const double> t);

/// The cancelable transformation T(s, x): projection through the seeded
/// matrix, then sign binarization when config.binarize is set. Pure function
/// of (seed, x, config).
Template transform(Seed seed, const FeatureVector& x, const TransformConfig& config);

/// Transforms several vectors under one seed while drawing each matrix
/// coefficient exactly once. Bit-identical to calling transform per vector.
std::vector<Template> transform_many(Seed seed, std::span<const FeatureVector> xs,
                                     const TransformConfig& config);

/// As transform(), but through a previously generated matrix. Bit-identical to
/// the from-seed path for the same (seed, config).
Template transform_with_matrix(const ProjectionMatrix& matrix, const FeatureVector& x);

}  // namespace bmk
