// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <stdexcept>
#include <string>

namespace bmk {

/// Base class for all toolkit errors.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Vector/template/matrix size disagreement, including real-vs-binary kind mismatch.
struct dimension_error : error {
  using error::error;
};

/// Rejected input values (non-finite entries, out-of-range parameters).
struct input_error : error {
  using error::error;
};

/// Malformed file content or incompatible on-disk configuration.
struct format_error : error {
  using error::error;
};

/// Invalid or incompatible transform/search configuration.
struct config_error : error {
  using error::error;
};

/// Orthonormalization hit a numerically dependent column; the caller may retry
/// with a seed derived from the failing one.
struct degenerate_matrix_error : error {
  using error::error;
};

/// Greedy dictionary construction made no progress after the allowed restarts.
struct stall_error : error {
  using error::error;
};

}  // namespace bmk
