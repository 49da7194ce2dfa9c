// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "bmk/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bmk/eval.hpp"
#include "bmk/seed_stream.hpp"
#include "bmk/transform.hpp"
#include "bmk/version.hpp"

namespace bmk {

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open '" + path.string() + "' for reading");
  return in;
}

void throw_on_violations(const FeatureDatabase& db, const std::string& origin) {
  const std::vector<Violation> violations = validate_feature_database(db);
  if (!violations.empty())
    throw format_error(origin + ": " + violations.front().message +
                       (violations.size() > 1
                            ? " (+" + std::to_string(violations.size() - 1) + " more)"
                            : ""));
}

}  // namespace

FeatureDatabase generate_synthetic_db(const SyntheticDbSpec& spec) {
  if (spec.persons < 1 || spec.samples_per_person < 1 || spec.dimension < 1)
    throw input_error("synthetic database needs n, t, N >= 1");
  if (spec.intra_sigma < 0.0 || !(spec.inter_scale > 0.0))
    throw input_error("synthetic database needs intra_sigma >= 0 and inter_scale > 0");

  FeatureDatabase db;
  db.dimension = spec.dimension;
  db.samples_per_person = spec.samples_per_person;
  db.persons.resize(spec.persons);
  for (std::size_t p = 0; p < spec.persons; ++p) {
    const Seed person_root = derive_seed(spec.rng_seed, p);
    PersonRecord& rec = db.persons[p];
    rec.person_id = "p" + std::to_string(p);

    std::vector<double> centroid(spec.dimension);
    {
      SeedStream stream(derive_seed(person_root, 0));
      NormalSampler normals(stream);
      for (double& c : centroid) c = spec.inter_scale * normals.next();
    }
    rec.samples.resize(spec.samples_per_person);
    for (std::size_t j = 0; j < spec.samples_per_person; ++j) {
      SeedStream stream(derive_seed(person_root, 1 + j));
      NormalSampler normals(stream);
      FeatureVector& x = rec.samples[j];
      x.values.resize(spec.dimension);
      for (std::size_t c = 0; c < spec.dimension; ++c)
        x.values[c] = centroid[c] + spec.intra_sigma * normals.next();
    }
  }
  return db;
}

double tune_intra_sigma(SyntheticDbSpec spec, double target_eer, double tol,
                        int max_iter) {
  if (!(target_eer > 0.0) || !(target_eer < 0.5))
    throw input_error("target EER must lie in (0, 0.5)");
  const auto eer_at = [&](double sigma) {
    spec.intra_sigma = sigma;
    return compute_eer(collect_feature_scores(generate_synthetic_db(spec))).eer;
  };
  double lo = 0.0;
  double hi = 2.0 * spec.inter_scale;
  int spent = 0;
  while (eer_at(hi) < target_eer && spent++ < 12) hi *= 2.0;
  double best = hi;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double eer = eer_at(mid);
    best = mid;
    if (std::abs(eer - target_eer) <= tol) break;
    if (eer < target_eer)
      lo = mid;
    else
      hi = mid;
  }
  return best;
}

FeatureFormat feature_format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".fvdb" ? FeatureFormat::Fvdb : FeatureFormat::Csv;
}

// --- CSV -------------------------------------------------------------------

namespace {

void save_feature_csv(const std::filesystem::path& path, const FeatureDatabase& db) {
  std::ofstream out = open_output(path);
  out << "person_id,sample_id";
  for (std::size_t c = 0; c < db.dimension; ++c) out << ",f" << c;
  out << "\n";
  for (const PersonRecord& rec : db.persons) {
    for (std::size_t j = 0; j < rec.samples.size(); ++j) {
      out << rec.person_id << "," << j;
      for (double v : rec.samples[j].values) out << "," << format_double(v);
      out << "\n";
    }
  }
  if (!out) throw format_error("failed writing '" + path.string() + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

FeatureDatabase load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw format_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "person_id" || header[1] != "sample_id")
    throw format_error(path.string() + ": line 1: header must start with "
                       "'person_id,sample_id,f0,...'");
  const std::size_t dim = header.size() - 2;
  for (std::size_t c = 0; c < dim; ++c)
    if (header[2 + c] != "f" + std::to_string(c))
      throw format_error(path.string() + ": line 1: expected column 'f" +
                         std::to_string(c) + "', got '" + header[2 + c] + "'");

  struct Row {
    std::size_t sample_id;
    FeatureVector x;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != dim + 2)
      throw format_error(path.string() + ": line " + std::to_string(line_no) +
                         ": expected " + std::to_string(dim + 2) + " fields, got " +
                         std::to_string(fields.size()));
    Row row;
    {
      const std::string& s = fields[1];
      std::size_t v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw format_error(path.string() + ": line " + std::to_string(line_no) +
                           ": sample_id '" + s + "' is not a non-negative integer");
      row.sample_id = v;
    }
    row.x.values.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::string& s = fields[2 + c];
      const auto res =
          std::from_chars(s.data(), s.data() + s.size(), row.x.values[c]);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw format_error(path.string() + ": line " + std::to_string(line_no) +
                           ": field f" + std::to_string(c) + " ('" + s +
                           "') is not a number");
    }
    auto [it, inserted] = rows.try_emplace(fields[0]);
    if (inserted) order.push_back(fields[0]);
    for (const Row& existing : it->second)
      if (existing.sample_id == row.sample_id)
        throw format_error(path.string() + ": line " + std::to_string(line_no) +
                           ": duplicate sample " + std::to_string(row.sample_id) +
                           " for person '" + fields[0] + "'");
    it->second.push_back(std::move(row));
  }
  if (order.empty()) throw format_error(path.string() + ": no data rows");

  FeatureDatabase db;
  db.dimension = dim;
  for (const std::string& id : order) {
    std::vector<Row>& person_rows = rows[id];
    std::sort(person_rows.begin(), person_rows.end(),
              [](const Row& a, const Row& b) { return a.sample_id < b.sample_id; });
    PersonRecord rec;
    rec.person_id = id;
    for (Row& r : person_rows) rec.samples.push_back(std::move(r.x));
    db.persons.push_back(std::move(rec));
  }
  db.samples_per_person = 0;
  for (const PersonRecord& rec : db.persons)
    db.samples_per_person = std::max(db.samples_per_person, rec.samples.size());
  throw_on_violations(db, path.string());
  return db;
}

// --- FVDB ------------------------------------------------------------------

constexpr char kFvdbMagic[4] = {'F', 'V', 'D', 'B'};
constexpr std::uint32_t kFvdbVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

struct ByteReader {
  const std::string& data;
  const std::string origin;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > data.size())
      throw format_error(origin + ": truncated at byte offset " + std::to_string(pos));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i]))
              << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
  }
};

void save_feature_fvdb(const std::filesystem::path& path, const FeatureDatabase& db) {
  std::string out;
  out.append(kFvdbMagic, 4);
  std::uint32_t n_vectors = 0;
  for (const PersonRecord& rec : db.persons)
    n_vectors += static_cast<std::uint32_t>(rec.samples.size());
  put_u32(out, kFvdbVersion);
  put_u32(out, n_vectors);
  put_u32(out, static_cast<std::uint32_t>(db.dimension));
  for (std::size_t p = 0; p < db.persons.size(); ++p) {
    for (std::size_t j = 0; j < db.persons[p].samples.size(); ++j) {
      put_u32(out, static_cast<std::uint32_t>(p));
      put_u32(out, static_cast<std::uint32_t>(j));
      for (double v : db.persons[p].samples[j].values) put_f64(out, v);
    }
  }
  std::ofstream file = open_output(path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw format_error("failed writing '" + path.string() + "'");
}

FeatureDatabase load_feature_fvdb(const std::filesystem::path& path) {
  std::ifstream file = open_input(path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string data = buffer.str();
  ByteReader reader{data, path.string()};

  reader.need(4);
  if (std::memcmp(data.data(), kFvdbMagic, 4) != 0)
    throw format_error(path.string() + ": bad magic, not an FVDB file");
  reader.pos = 4;
  const std::uint32_t version = reader.u32();
  if (version != kFvdbVersion)
    throw format_error(path.string() + ": unsupported FVDB version " +
                       std::to_string(version));
  const std::uint32_t n_vectors = reader.u32();
  const std::uint32_t dim = reader.u32();
  if (dim == 0) throw format_error(path.string() + ": zero dimension");

  struct Slot {
    std::uint32_t sample;
    FeatureVector x;
  };
  std::vector<std::vector<Slot>> buckets;
  for (std::uint32_t r = 0; r < n_vectors; ++r) {
    const std::uint32_t person = reader.u32();
    const std::uint32_t sample = reader.u32();
    if (person >= n_vectors)
      throw format_error(path.string() + ": person index " + std::to_string(person) +
                         " out of range for " + std::to_string(n_vectors) + " records");
    FeatureVector x;
    x.values.resize(dim);
    for (std::uint32_t c = 0; c < dim; ++c) x.values[c] = reader.f64();
    if (person >= buckets.size()) buckets.resize(person + 1);
    for (const Slot& s : buckets[person])
      if (s.sample == sample)
        throw format_error(path.string() + ": duplicate record for person " +
                           std::to_string(person) + " sample " + std::to_string(sample));
    buckets[person].push_back({sample, std::move(x)});
  }
  if (reader.pos != data.size())
    throw format_error(path.string() + ": " +
                       std::to_string(data.size() - reader.pos) +
                       " trailing bytes after the last record");

  FeatureDatabase db;
  db.dimension = dim;
  for (std::size_t p = 0; p < buckets.size(); ++p) {
    if (buckets[p].empty())
      throw format_error(path.string() + ": person index " + std::to_string(p) +
                         " has no records");
    std::sort(buckets[p].begin(), buckets[p].end(),
              [](const Slot& a, const Slot& b) { return a.sample < b.sample; });
    PersonRecord rec;
    rec.person_id = "p" + std::to_string(p);
    for (Slot& s : buckets[p]) rec.samples.push_back(std::move(s.x));
    db.persons.push_back(std::move(rec));
  }
  if (db.persons.empty()) throw format_error(path.string() + ": no records");
  db.samples_per_person = 0;
  for (const PersonRecord& rec : db.persons)
    db.samples_per_person = std::max(db.samples_per_person, rec.samples.size());
  throw_on_violations(db, path.string());
  return db;
}

}  // namespace

FeatureDatabase load_feature_db(const std::filesystem::path& path, FeatureFormat format) {
  return format == FeatureFormat::Fvdb ? load_feature_fvdb(path) : load_feature_csv(path);
}

FeatureDatabase load_feature_db(const std::filesystem::path& path) {
  return load_feature_db(path, feature_format_for_path(path));
}

void save_feature_db(const std::filesystem::path& path, const FeatureDatabase& db,
                     FeatureFormat format) {
  if (format == FeatureFormat::Fvdb)
    save_feature_fvdb(path, db);
  else
    save_feature_csv(path, db);
}

void save_feature_db(const std::filesystem::path& path, const FeatureDatabase& db) {
  save_feature_db(path, db, feature_format_for_path(path));
}

// --- Cancelable database JSON ------------------------------------------------

namespace {

std::string bytes_to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::vector<std::uint8_t> hex_to_bytes(const std::string& hex, const std::string& what) {
  if (hex.size() % 2 != 0)
    throw format_error(what + ": odd hex length " + std::to_string(hex.size()));
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto nibble = [&](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      throw format_error(what + ": invalid hex digit '" + std::string(1, c) + "'");
    };
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace

void save_cancelable_db(const std::filesystem::path& path, const CancelableDatabase& db) {
  json doc;
  doc["format"] = "bmk-cancelable-db";
  doc["version"] = 1;
  doc["transform"] = {{"family", std::string(family_name(db.config.family))},
                      {"input_dim", db.config.input_dim},
                      {"output_dim", db.config.output_dim},
                      {"binarize", db.config.binarize},
                      {"prng_id", db.config.prng_id}};
  doc["tau_b"] = db.tau_b;
  json entries = json::array();
  for (const CancelableEntry& e : db.entries) {
    json entry;
    entry["person_id"] = e.person_id;
    entry["seed"] = e.seed.to_hex();
    if (is_binary(e.tmpl))
      entry["template"] = bytes_to_hex(std::get<BinaryTemplate>(e.tmpl).bytes());
    else
      entry["template"] = std::get<RealTemplate>(e.tmpl).values;
    entries.push_back(std::move(entry));
  }
  doc["entries"] = std::move(entries);

  std::ofstream out = open_output(path);
  out << doc.dump(2) << "\n";
  if (!out) throw format_error("failed writing '" + path.string() + "'");
}

CancelableDatabase load_cancelable_db(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "bmk-cancelable-db")
      throw format_error(path.string() + ": not a bmk cancelable database file");
    if (doc.at("version").get<int>() != 1)
      throw format_error(path.string() + ": unsupported version");
    const json& t = doc.at("transform");
    TransformConfig config;
    config.family = family_from_name(t.at("family").get<std::string>());
    config.input_dim = t.at("input_dim").get<std::size_t>();
    config.output_dim = t.at("output_dim").get<std::size_t>();
    config.binarize = t.at("binarize").get<bool>();
    config.prng_id = t.at("prng_id").get<std::string>();

    std::vector<CancelableEntry> entries;
    for (const json& entry : doc.at("entries")) {
      CancelableEntry e;
      e.person_id = entry.at("person_id").get<std::string>();
      e.seed = Seed::from_hex(entry.at("seed").get<std::string>());
      const json& tmpl = entry.at("template");
      if (tmpl.is_string()) {
        if (!config.binarize)
          throw format_error(path.string() + ": hex template in a real-valued database");
        e.tmpl = BinaryTemplate::from_bytes(
            config.output_dim,
            hex_to_bytes(tmpl.get<std::string>(), "template of '" + e.person_id + "'"));
      } else {
        if (config.binarize)
          throw format_error(path.string() + ": float template in a binary database");
        e.tmpl = RealTemplate{tmpl.get<std::vector<double>>()};
      }
      entries.push_back(std::move(e));
    }
    return make_cancelable_database(std::move(config), doc.at("tau_b").get<double>(),
                                    std::move(entries));
  } catch (const json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
}

CancelableDatabase enroll(const FeatureDatabase& features, const TransformConfig& config,
                          double tau_b, Seed root_seed, bool all_samples) {
  validate_config(config);
  std::vector<CancelableEntry> entries;
  for (std::size_t p = 0; p < features.persons.size(); ++p) {
    const PersonRecord& rec = features.persons[p];
    if (rec.samples.empty())
      throw input_error("person '" + rec.person_id + "' has no samples");
    SeedStream person_stream(derive_seed(root_seed, p));
    // A degenerate Gram-Schmidt draw moves on to the next candidate seed.
    for (int attempt = 0; attempt < 16; ++attempt) {
      const Seed seed = person_stream.next_seed();
      try {
        if (all_samples) {
          const std::vector<Template> templates =
              transform_many(seed, rec.samples, config);
          for (std::size_t j = 0; j < templates.size(); ++j)
            entries.push_back({rec.person_id, seed, templates[j]});
        } else {
          entries.push_back({rec.person_id, seed, transform(seed, rec.samples[0], config)});
        }
        break;
      } catch (const degenerate_matrix_error&) {
        if (attempt == 15) throw;
      }
    }
  }
  return make_cancelable_database(config, tau_b, std::move(entries));
}

// --- Reports -----------------------------------------------------------------

std::string report_to_json(const ExperimentReport& report) {
  json doc;
  doc["experiment"] = report.experiment;
  doc["version"] = kVersion;
  doc["prng_id"] = kPrngId;
  doc["config"] = report.config;
  doc["metrics"] = report.metrics;
  json series = json::object();
  for (const auto& [name, points] : report.series) {
    json list = json::array();
    for (const auto& [x, y] : points) list.push_back(json::array({x, y}));
    series[name] = std::move(list);
  }
  doc["series"] = std::move(series);
  return doc.dump(2);
}

void write_report(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream out = open_output(path);
  out << report_to_json(report) << "\n";
  if (!out) throw format_error("failed writing '" + path.string() + "'");
}

void write_series_csv(const std::filesystem::path& path, const std::string& x_name,
                      const std::string& y_name,
                      const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out = open_output(path);
  out << x_name << "," << y_name << "\n";
  for (const auto& [x, y] : rows)
    out << format_double(x) << "," << format_double(y) << "\n";
  if (!out) throw format_error("failed writing '" + path.string() + "'");
}

}  // namespace bmk
