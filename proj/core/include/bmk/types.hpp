// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "bmk/errors.hpp"

namespace bmk {

/// 128-bit token driving deterministic matrix generation. Canonical text form
/// is 32 lowercase hex characters, high word first.
struct Seed {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  static Seed from_hex(std::string_view hex);
  std::string to_hex() const;

  auto operator<=>(const Seed&) const = default;
};

/// Real feature vector, the input space of the cancelable transformation.
struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Returns true iff every entry is finite.
bool all_finite(const FeatureVector& x);

/// Binary template of M bits, stored packed, most-significant-bit-first within
/// each byte. Trailing bits of the last byte are always zero.
class BinaryTemplate {
 public:
  BinaryTemplate() = default;
  explicit BinaryTemplate(std::size_t bit_count)
      : bit_count_(bit_count), bytes_((bit_count + 7) / 8, 0) {}

  /// Rebuilds a template from its packed byte form; rejects nonzero padding bits.
  static BinaryTemplate from_bytes(std::size_t bit_count, std::vector<std::uint8_t> bytes);

  std::size_t size() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  bool bit(std::size_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }
  void set_bit(std::size_t i, bool value) {
    const std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - (i & 7)));
    if (value)
      bytes_[i >> 3] |= mask;
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }

  /// Number of set bits.
  std::size_t popcount() const;

  bool operator==(const BinaryTemplate&) const = default;

 private:
  std::size_t bit_count_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Real-valued template (projection output without binarization).
struct RealTemplate {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const RealTemplate&) const = default;
};

/// A stored template is either real or binary; the two variants never compare
/// against each other.
using Template = std::variant<RealTemplate, BinaryTemplate>;

bool is_binary(const Template& t);
std::size_t template_size(const Template& t);

/// One enrolled person: opaque identity label plus its feature samples.
struct PersonRecord {
  std::string person_id;
  std::vector<FeatureVector> samples;
};

/// Feature vectors of n persons with t samples each, all of dimension N.
/// The struct itself does not enforce its invariants; see validate_feature_database.
struct FeatureDatabase {
  std::vector<PersonRecord> persons;
  std::size_t dimension = 0;           // N
  std::size_t samples_per_person = 0;  // t

  std::size_t person_count() const { return persons.size(); }
};

enum class ViolationKind {
  DimensionMismatch,
  NonFiniteValue,
  DuplicatePersonId,
  SampleCountMismatch,
};

struct Violation {
  ViolationKind kind;
  std::size_t person = 0;  // index into persons
  std::size_t sample = 0;  // index into samples, when applicable
  std::string message;
};

/// Checks every database invariant and returns one record per failure.
/// An empty result means the database is well formed.
std::vector<Violation> validate_feature_database(const FeatureDatabase& db);

enum class MatrixFamily { GramSchmidt, JL1, JL2 };

std::string_view family_name(MatrixFamily family);
MatrixFamily family_from_name(std::string_view name);

/// Identifier of the deterministic seed-expansion scheme. Any change to the
/// word stream, the coefficient laws, or the draw order requires a new id.
inline constexpr const char* kPrngId = "smx64-bm-v1";

/// Configuration of the cancelable transformation T(s, x).
struct TransformConfig {
  MatrixFamily family = MatrixFamily::GramSchmidt;
  std::size_t input_dim = 0;   // N
  std::size_t output_dim = 0;  // M
  bool binarize = true;
  std::string prng_id = kPrngId;

  bool operator==(const TransformConfig&) const = default;
};

/// Throws config_error unless the configuration is usable (M >= 1, Gram-Schmidt
/// needs M <= N, known prng_id).
void validate_config(const TransformConfig& config);

/// One stored enrollment: identity label, its secret seed, and the template.
struct CancelableEntry {
  std::string person_id;
  Seed seed;
  Template tmpl;
};

/// Per-person (seed, template) pairs plus the transform configuration and the
/// decision threshold. Build through make_cancelable_database to get the
/// homogeneity invariants checked.
struct CancelableDatabase {
  TransformConfig config;
  double tau_b = 0.0;
  std::vector<CancelableEntry> entries;
};

/// Validates variant homogeneity and dimensions against the config, then
/// assembles the database. Throws config_error or dimension_error.
CancelableDatabase make_cancelable_database(TransformConfig config, double tau_b,
                                            std::vector<CancelableEntry> entries);

/// Stable id -> index map over a person list. Internal operations address
/// persons by index; labels exist for files and reports.
class PersonIndex {
 public:
  explicit PersonIndex(const FeatureDatabase& db);
  explicit PersonIndex(const CancelableDatabase& db);

  /// Index for a label; throws input_error for unknown ids.
  std::size_t at(std::string_view person_id) const;
  bool contains(std::string_view person_id) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  void insert(const std::string& id);
};

}  // namespace bmk
