// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emostress/core/hash.hpp"
#include "emostress/core/rng.hpp"
#include "emostress/io/atomic_file.hpp"
#include "emostress/io/delimited.hpp"

namespace emostress {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kCanonicalFormat = "emostress-examples";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\v\f");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(sep, start);
    const auto piece = trim(s.substr(start, end == std::string_view::npos ? s.size() - start
                                                                          : end - start));
    if (!piece.empty()) parts.push_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == name) return i;
  throw CorpusError("missing column '" + name + "'");
}

ojson record_json(const TextExample& ex) {
  ojson j;
  j["id"] = ex.id;
  j["text"] = ex.text;
  j["source"] = to_string(ex.source);
  j["stress_label"] = ex.stress ? ojson(static_cast<int>(*ex.stress)) : ojson(nullptr);
  if (ex.emotions) {
    std::vector<int> bits(kEmotionCount);
    for (std::size_t i = 0; i < kEmotionCount; ++i) bits[i] = ex.emotions->test(i) ? 1 : 0;
    j["emotions"] = bits;
  } else {
    j["emotions"] = nullptr;
  }
  j["emotion_is_pseudo"] = ex.emotion_is_pseudo;
  return j;
}

TextExample record_from_json(const ojson& j) {
  TextExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.text = j.at("text").get<std::string>();
  ex.source = source_from_string(j.at("source").get<std::string>());
  const auto& label = j.at("stress_label");
  if (!label.is_null()) {
    const int v = label.get<int>();
    if (v != 0 && v != 1) throw std::invalid_argument("stress_label outside {0,1}");
    ex.stress = static_cast<StressLabel>(v);
  }
  const auto& emo = j.at("emotions");
  if (!emo.is_null()) {
    const auto bits = emo.get<std::vector<int>>();
    if (bits.size() != kEmotionCount) throw std::invalid_argument("emotions must have 7 entries");
    EmotionVector v;
    for (std::size_t i = 0; i < kEmotionCount; ++i) v.set(i, bits[i] != 0);
    ex.emotions = v;
  }
  ex.emotion_is_pseudo = j.at("emotion_is_pseudo").get<bool>();
  return ex;
}

std::string record_lines(std::span<const TextExample> examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += record_json(ex).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::StressCorpus: return "stress";
    case Source::MinorityCorpus: return "minority";
    case Source::EmotionCorpus: return "emotion";
  }
  return "unknown";
}

Source source_from_string(std::string_view s) {
  if (s == "stress") return Source::StressCorpus;
  if (s == "minority") return Source::MinorityCorpus;
  if (s == "emotion") return Source::EmotionCorpus;
  throw std::invalid_argument("unknown corpus source '" + std::string(s) + "'");
}

void validate_example(const TextExample& ex) {
  if (trim(ex.text).empty()) throw std::invalid_argument("empty text");
  if (ex.id.empty()) throw std::invalid_argument("empty id");
  switch (ex.source) {
    case Source::StressCorpus:
    case Source::MinorityCorpus:
      if (!ex.stress) throw std::invalid_argument("missing stress label");
      break;
    case Source::EmotionCorpus:
      if (!ex.emotions || ex.emotions->none())
        throw std::invalid_argument("emotion example needs at least one label");
      break;
  }
  if (ex.emotion_is_pseudo && !ex.emotions)
    throw std::invalid_argument("pseudo flag set without an emotion vector");
}

double LoadReport::positive_proportion() const {
  std::size_t labeled = 0, positive = 0;
  for (const auto& ex : examples) {
    if (!ex.stress) continue;
    ++labeled;
    if (*ex.stress == StressLabel::Stressed) ++positive;
  }
  return labeled == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(labeled);
}

LoadReport load_corpus(const std::filesystem::path& path, Source source,
                       const ColumnSchema& schema, const EmotionTaxonomy& taxonomy) {
  if (!std::filesystem::exists(path)) throw CorpusError("missing file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  io::DelimitedTable table;
  try {
    table = io::read_delimited(in, schema.delimiter);
  } catch (const std::runtime_error& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }

  const std::size_t text_idx = column_index(table.header, schema.text_col);
  std::optional<std::size_t> id_idx;
  if (schema.id_col) id_idx = column_index(table.header, *schema.id_col);
  std::optional<std::size_t> label_idx;
  std::vector<std::pair<std::size_t, std::string>> indicator_cols;
  if (source == Source::EmotionCorpus && schema.emotion_format == EmotionLabelFormat::Indicators) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      const auto name = trim(table.header[i]);
      if (taxonomy.coarse_of(name)) indicator_cols.emplace_back(i, name);
    }
    if (indicator_cols.empty()) throw CorpusError("missing column: no emotion indicator columns");
  } else {
    label_idx = column_index(table.header, schema.label_col);
  }

  LoadReport report;
  report.records = table.records.size();
  std::set<std::string> seen_ids;
  for (std::size_t r = 0; r < table.records.size(); ++r) {
    const auto& rec = table.records[r];
    const std::size_t record_no = r + 1;
    auto reject = [&](std::string msg) {
      report.rejected.push_back({record_no, rec.line, std::move(msg)});
    };
    if (rec.unterminated_quote) {
      reject("unterminated quoted field");
      continue;
    }
    if (rec.fields.size() != table.header.size()) {
      reject("expected " + std::to_string(table.header.size()) + " fields, found " +
             std::to_string(rec.fields.size()));
      continue;
    }
    TextExample ex;
    ex.source = source;
    ex.text = trim(rec.fields[text_idx]);
    if (ex.text.empty()) {
      reject("empty text");
      continue;
    }
    if (id_idx) {
      ex.id = trim(rec.fields[*id_idx]);
    } else {
      ex.id = std::string(to_string(source)) + "-" + std::to_string(record_no);
    }
    if (ex.id.empty()) {
      reject("empty id");
      continue;
    }
    if (seen_ids.contains(ex.id)) {
      reject("duplicate id '" + ex.id + "'");
      continue;
    }

    try {
      if (source == Source::EmotionCorpus) {
        if (schema.emotion_format == EmotionLabelFormat::Indicators) {
          std::vector<std::string> active;
          for (const auto& [col, name] : indicator_cols) {
            const auto v = trim(rec.fields[col]);
            if (v == "1") active.push_back(name);
            else if (v != "0" && !v.empty())
              throw std::invalid_argument("label '" + v + "' in column '" + name + "' outside {0,1}");
          }
          ex.emotions = taxonomy.map_fine_to_ekman(active);
        } else {
          const auto parts = split_on(rec.fields[*label_idx], schema.label_separator);
          if (schema.emotion_format == EmotionLabelFormat::Names) {
            ex.emotions = taxonomy.map_fine_to_ekman(parts);
          } else {
            std::vector<std::size_t> idx;
            for (const auto& p : parts) {
              std::size_t v = 0;
              const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
              if (ec != std::errc() || ptr != p.data() + p.size())
                throw std::invalid_argument("emotion index '" + p + "' is not an integer");
              idx.push_back(v);
            }
            ex.emotions = taxonomy.map_fine_indices(idx);
          }
        }
      } else {
        const auto v = trim(rec.fields[*label_idx]);
        if (v == "0") ex.stress = StressLabel::NotStressed;
        else if (v == "1") ex.stress = StressLabel::Stressed;
        else throw std::invalid_argument("label '" + v + "' outside {0,1}");
      }
      validate_example(ex);
    } catch (const std::invalid_argument& e) {
      reject(e.what());
      continue;
    }
    seen_ids.insert(ex.id);
    report.examples.push_back(std::move(ex));
  }
  return report;
}

SplitCounts counts_from_ratios(std::size_t n, double train_ratio, double dev_ratio) {
  if (train_ratio < 0 || dev_ratio < 0 || train_ratio + dev_ratio > 1.0 + 1e-12)
    throw std::invalid_argument("split ratios must be non-negative and sum to at most 1");
  const double nd = static_cast<double>(n);
  SplitCounts c;
  c.train = static_cast<std::size_t>(std::floor(nd * train_ratio + 1e-9));
  c.dev = std::min(n - c.train, static_cast<std::size_t>(std::floor(nd * dev_ratio + 1e-9)));
  c.test = n - c.train - c.dev;
  return c;
}

DatasetSplit split_dataset(std::span<const TextExample> examples, SplitCounts counts,
                           std::uint64_t seed, std::string name) {
  if (counts.total() != examples.size())
    throw std::invalid_argument("split counts (" + std::to_string(counts.train) + "," +
                                std::to_string(counts.dev) + "," + std::to_string(counts.test) +
                                ") do not sum to the " + std::to_string(examples.size()) +
                                " available examples");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, RngStream::Shuffle);
  rng.shuffle(std::span<std::size_t>(order));

  DatasetSplit split;
  split.name = std::move(name);
  split.seed = seed;
  auto take = [&](std::size_t begin, std::size_t count, std::vector<TextExample>& out) {
    out.reserve(count);
    for (std::size_t i = begin; i < begin + count; ++i) out.push_back(examples[order[i]]);
  };
  take(0, counts.train, split.train);
  take(counts.train, counts.dev, split.dev);
  take(counts.train + counts.dev, counts.test, split.test);
  return split;
}

ReductionPlan ReductionPlan::for_fraction(double fraction, std::size_t train_size,
                                          std::uint64_t seed) {
  const auto it = std::find_if(kReductionFractions.begin(), kReductionFractions.end(),
                               [&](double f) { return std::abs(f - fraction) < 1e-9; });
  if (it == kReductionFractions.end())
    throw std::invalid_argument("reduction fraction must be one of 0.10, 0.25, 0.50, 0.75, 1.00");
  ReductionPlan plan;
  plan.fraction = *it;
  plan.seed = seed;
  // Published training-set sizes for the 2,122-example stress training split.
  static constexpr std::array<std::size_t, 5> kPublished = {212, 530, 1060, 1591, 2122};
  const auto idx = static_cast<std::size_t>(it - kReductionFractions.begin());
  if (train_size == 2122) {
    plan.target_count = kPublished[idx];
  } else {
    plan.target_count = static_cast<std::size_t>(
        std::floor(plan.fraction * static_cast<double>(train_size) + 1e-9));
  }
  return plan;
}

DatasetSplit reduce_training_set(const DatasetSplit& split, const ReductionPlan& plan) {
  if (std::none_of(kReductionFractions.begin(), kReductionFractions.end(),
                   [&](double f) { return std::abs(f - plan.fraction) < 1e-9; }))
    throw std::invalid_argument("reduction fraction must be one of 0.10, 0.25, 0.50, 0.75, 1.00");
  const std::size_t n = split.train.size();
  if (plan.target_count > n)
    throw std::invalid_argument("reduction target " + std::to_string(plan.target_count) +
                                " exceeds the " + std::to_string(n) + " training examples");
  DatasetSplit out;
  out.name = split.name;
  out.seed = split.seed;
  out.dev = split.dev;
  out.test = split.test;
  if (plan.target_count == n) {
    out.train = split.train;
    return out;
  }

  // Strata: not stressed, stressed, unlabeled.
  std::array<std::vector<std::size_t>, 3> strata;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = split.train[i];
    const std::size_t s = ex.stress ? static_cast<std::size_t>(*ex.stress) : 2;
    strata[s].push_back(i);
  }
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = static_cast<double>(plan.target_count) *
                         static_cast<double>(strata[s].size()) / static_cast<double>(n);
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(quota[s]);
    assigned += quota[s];
  }
  while (assigned < plan.target_count) {
    std::size_t best = 3;
    for (std::size_t s = 0; s < 3; ++s) {
      if (quota[s] >= strata[s].size()) continue;
      if (best == 3 || remainder[s] > remainder[best]) best = s;
    }
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  Rng rng(plan.seed, RngStream::Sampling);
  std::vector<std::size_t> chosen;
  chosen.reserve(plan.target_count);
  for (std::size_t s = 0; s < 3; ++s) {
    auto pool = strata[s];
    rng.shuffle(std::span<std::size_t>(pool));
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[s]));
  }
  std::sort(chosen.begin(), chosen.end());
  out.train.reserve(chosen.size());
  for (auto i : chosen) out.train.push_back(split.train[i]);
  return out;
}

std::string serialize_canonical(std::span<const TextExample> examples) {
  const std::string body = record_lines(examples);
  ojson header;
  header["format"] = kCanonicalFormat;
  header["schema_version"] = kCanonicalSchemaVersion;
  header["count"] = examples.size();
  header["checksum"] = sha256_hex(body);
  return header.dump() + "\n" + body;
}

void write_canonical(const std::filesystem::path& path, std::span<const TextExample> examples) {
  io::write_file_atomically(path, serialize_canonical(examples));
}

std::vector<TextExample> parse_canonical(std::string_view contents) {
  const auto first_nl = contents.find('\n');
  if (first_nl == std::string_view::npos)
    throw std::runtime_error("canonical file: missing header line (offset 0)");
  ojson header;
  try {
    header = ojson::parse(contents.substr(0, first_nl));
  } catch (const ojson::exception&) {
    throw std::runtime_error("canonical file: corrupt header at offset 0");
  }
  if (header.value("format", std::string{}) != kCanonicalFormat)
    throw std::runtime_error("canonical file: unrecognized format");
  const int version = header.value("schema_version", -1);
  if (version != kCanonicalSchemaVersion)
    throw std::runtime_error("canonical file: schema version mismatch (file has " +
                             std::to_string(version) + ", reader supports " +
                             std::to_string(kCanonicalSchemaVersion) + ")");

  const std::string_view body = contents.substr(first_nl + 1);
  std::vector<TextExample> examples;
  std::size_t pos = 0;
  std::size_t line = 2;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const auto text = body.substr(pos, nl - pos);
    const std::size_t offset = first_nl + 1 + pos;
    try {
      auto ex = record_from_json(ojson::parse(text));
      validate_example(ex);
      examples.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw std::runtime_error("canonical file: corrupt record at byte offset " +
                               std::to_string(offset) + " (line " + std::to_string(line) +
                               "): " + e.what());
    }
    pos = nl + 1;
    ++line;
  }
  if (header.value("count", std::size_t{0}) != examples.size())
    throw std::runtime_error("canonical file: header count " +
                             std::to_string(header.value("count", std::size_t{0})) +
                             " but found " + std::to_string(examples.size()) + " records");
  if (header.value("checksum", std::string{}) != sha256_hex(body))
    throw std::runtime_error("canonical file: checksum failure");
  return examples;
}

std::vector<TextExample> read_canonical(const std::filesystem::path& path) {
  return parse_canonical(io::read_file(path));
}

std::string dataset_fingerprint(std::span<const TextExample> examples) {
  return sha256_hex(record_lines(examples));
}

}  // namespace emostress
