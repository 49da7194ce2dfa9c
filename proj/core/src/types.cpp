// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/types.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <unordered_set>

namespace bmk {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Seed Seed::from_hex(std::string_view hex) {
  if (hex.size() != 32)
    throw format_error("seed hex must be exactly 32 characters, got " +
                       std::to_string(hex.size()));
  Seed s;
  for (int i = 0; i < 32; ++i) {
    const int d = hex_digit(hex[i]);
    if (d < 0) throw format_error(std::string("invalid hex digit in seed: '") + hex[i] + "'");
    if (i < 16)
      s.hi = (s.hi << 4) | static_cast<std::uint64_t>(d);
    else
      s.lo = (s.lo << 4) | static_cast<std::uint64_t>(d);
  }
  return s;
}

std::string Seed::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = digits[(hi >> (4 * i)) & 0xF];
    out[31 - i] = digits[(lo >> (4 * i)) & 0xF];
  }
  return out;
}

bool all_finite(const FeatureVector& x) {
  for (double v : x.values)
    if (!std::isfinite(v)) return false;
  return true;
}

BinaryTemplate BinaryTemplate::from_bytes(std::size_t bit_count,
                                          std::vector<std::uint8_t> bytes) {
  if (bytes.size() != (bit_count + 7) / 8)
    throw format_error("packed template has " + std::to_string(bytes.size()) +
                       " bytes, expected " + std::to_string((bit_count + 7) / 8));
  if (bit_count % 8 != 0) {
    const std::uint8_t tail_mask =
        static_cast<std::uint8_t>(0xFFu >> (bit_count % 8));
    if ((bytes.back() & tail_mask) != 0)
      throw format_error("packed template has nonzero padding bits");
  }
  BinaryTemplate t;
  t.bit_count_ = bit_count;
  t.bytes_ = std::move(bytes);
  return t;
}

std::size_t BinaryTemplate::popcount() const {
  std::size_t total = 0;
  std::size_t i = 0;
  const std::size_t n = bytes_.size();
  for (; i + 8 <= n; i += 8) {
    std::uint64_t w;
    std::memcpy(&w, bytes_.data() + i, 8);
    total += static_cast<std::size_t>(std::popcount(w));
  }
  for (; i < n; ++i) total += static_cast<std::size_t>(std::popcount(bytes_[i]));
  return total;
}

bool is_binary(const Template& t) {
  return std::holds_alternative<BinaryTemplate>(t);
}

std::size_t template_size(const Template& t) {
  return std::visit([](const auto& v) { return v.size(); }, t);
}

std::vector<Violation> validate_feature_database(const FeatureDatabase& db) {
  std::vector<Violation> out;
  std::unordered_set<std::string_view> seen;
  for (std::size_t p = 0; p < db.persons.size(); ++p) {
    const PersonRecord& rec = db.persons[p];
    if (!seen.insert(rec.person_id).second) {
      out.push_back({ViolationKind::DuplicatePersonId, p, 0,
                     "duplicate person id '" + rec.person_id + "'"});
    }
    if (rec.samples.empty()) {
      out.push_back({ViolationKind::SampleCountMismatch, p, 0,
                     "person '" + rec.person_id + "' has no samples"});
    } else if (rec.samples.size() != db.samples_per_person) {
      out.push_back({ViolationKind::SampleCountMismatch, p, 0,
                     "person '" + rec.person_id + "' has " +
                         std::to_string(rec.samples.size()) + " samples, declared " +
                         std::to_string(db.samples_per_person)});
    }
    for (std::size_t s = 0; s < rec.samples.size(); ++s) {
      const FeatureVector& x = rec.samples[s];
      if (x.size() != db.dimension) {
        out.push_back({ViolationKind::DimensionMismatch, p, s,
                       "person '" + rec.person_id + "' sample " + std::to_string(s) +
                           " has dimension " + std::to_string(x.size()) + ", expected " +
                           std::to_string(db.dimension)});
      }
      if (!all_finite(x)) {
        out.push_back({ViolationKind::NonFiniteValue, p, s,
                       "person '" + rec.person_id + "' sample " + std::to_string(s) +
                           " contains a non-finite value"});
      }
    }
  }
  return out;
}

std::string_view family_name(MatrixFamily family) {
  switch (family) {
    case MatrixFamily::GramSchmidt: return "gram-schmidt";
    case MatrixFamily::JL1: return "jl1";
    case MatrixFamily::JL2: return "jl2";
  }
  throw config_error("unknown matrix family");
}

MatrixFamily family_from_name(std::string_view name) {
  if (name == "gram-schmidt" || name == "gs") return MatrixFamily::GramSchmidt;
  if (name == "jl1") return MatrixFamily::JL1;
  if (name == "jl2") return MatrixFamily::JL2;
  throw config_error("unknown matrix family '" + std::string(name) + "'");
}

void validate_config(const TransformConfig& config) {
  if (config.output_dim < 1) throw config_error("output dimension must be >= 1");
  if (config.input_dim < 1) throw config_error("input dimension must be >= 1");
  if (config.family == MatrixFamily::GramSchmidt && config.output_dim > config.input_dim)
    throw config_error("Gram-Schmidt orthonormalization needs M <= N, got M=" +
                       std::to_string(config.output_dim) + " N=" +
                       std::to_string(config.input_dim));
  if (config.prng_id != kPrngId)
    throw config_error("unsupported seed-expansion scheme '" + config.prng_id +
                       "' (this build implements '" + kPrngId + "')");
}

CancelableDatabase make_cancelable_database(TransformConfig config, double tau_b,
                                            std::vector<CancelableEntry> entries) {
  validate_config(config);
  for (const CancelableEntry& e : entries) {
    if (is_binary(e.tmpl) != config.binarize)
      throw config_error("template variant of '" + e.person_id +
                         "' does not match config.binarize");
    if (template_size(e.tmpl) != config.output_dim)
      throw dimension_error("template of '" + e.person_id + "' has length " +
                            std::to_string(template_size(e.tmpl)) + ", expected " +
                            std::to_string(config.output_dim));
  }
  CancelableDatabase db;
  db.config = std::move(config);
  db.tau_b = tau_b;
  db.entries = std::move(entries);
  return db;
}

PersonIndex::PersonIndex(const FeatureDatabase& db) {
  for (const PersonRecord& rec : db.persons) insert(rec.person_id);
}

PersonIndex::PersonIndex(const CancelableDatabase& db) {
  for (const CancelableEntry& e : db.entries)
    if (!contains(e.person_id)) insert(e.person_id);
}

void PersonIndex::insert(const std::string& id) {
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
}

std::size_t PersonIndex::at(std::string_view person_id) const {
  auto it = index_.find(std::string(person_id));
  if (it == index_.end())
    throw input_error("unknown person id '" + std::string(person_id) + "'");
  return it->second;
}

bool PersonIndex::contains(std::string_view person_id) const {
  return index_.find(std::string(person_id)) != index_.end();
}

}  // namespace bmk
