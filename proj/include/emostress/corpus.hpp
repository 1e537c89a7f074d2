// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "emostress/emotaxonomy.hpp"

namespace emostress {

enum class Source { StressCorpus, MinorityCorpus, EmotionCorpus };

std::string_view to_string(Source s);
Source source_from_string(std::string_view s);  // "stress" | "minority" | "emotion"

/// Index 1 is the positive (stressed) class everywhere, including logits.
enum class StressLabel : int { NotStressed = 0, Stressed = 1 };

struct TextExample {
  std::string id;
  std::string text;
  Source source = Source::StressCorpus;
  std::optional<StressLabel> stress;
  std::optional<EmotionVector> emotions;
  bool emotion_is_pseudo = false;

  friend bool operator==(const TextExample&, const TextExample&) = default;
};

/// Throws std::invalid_argument when an example breaks the per-source
/// invariants (non-empty text, stress label present for stress and
/// minority corpora, non-empty gold emotions for the emotion corpus).
void validate_example(const TextExample& ex);

/// How emotion labels are spelled in an emotion-corpus file.
enum class EmotionLabelFormat {
  Names,       // one column of separator-joined fine label names
  Indices,     // one column of separator-joined fine label indices
  Indicators,  // one 0/1 column per fine label, named after the label
};

struct ColumnSchema {
  std::string text_col = "text";
  std::string label_col = "label";
  std::optional<std::string> id_col;
  char delimiter = ',';
  EmotionLabelFormat emotion_format = EmotionLabelFormat::Names;
  char label_separator = ',';
};

struct RowError {
  std::size_t record = 0;  // 1-based data record index (header excluded)
  std::size_t line = 0;    // 1-based line number in the file
  std::string message;
};

struct LoadReport {
  std::vector<TextExample> examples;
  std::vector<RowError> rejected;
  std::size_t records = 0;  // data rows in the file; == examples + rejected

  /// Share of loaded examples labeled stressed (0 when none carry labels).
  double positive_proportion() const;
};

/// File-level problems (missing file, missing column, empty file).
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads and validates one corpus file. Row-level problems never abort the
/// load: the row is rejected and reported with its position.
LoadReport load_corpus(const std::filesystem::path& path, Source source,
                       const ColumnSchema& schema,
                       const EmotionTaxonomy& taxonomy = EmotionTaxonomy::builtin());

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
  std::size_t total() const { return train + dev + test; }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// floor(train), floor(dev), remainder to test.
SplitCounts counts_from_ratios(std::size_t n, double train_ratio, double dev_ratio);

struct DatasetSplit {
  std::string name;
  std::vector<TextExample> train;
  std::vector<TextExample> dev;
  std::vector<TextExample> test;
  std::uint64_t seed = 0;

  SplitCounts counts() const { return {train.size(), dev.size(), test.size()}; }
};

/// Seeded shuffle, then slice into train/dev/test of exactly `counts`.
DatasetSplit split_dataset(std::span<const TextExample> examples, SplitCounts counts,
                           std::uint64_t seed, std::string name = {});

inline constexpr std::array<double, 5> kReductionFractions = {0.10, 0.25, 0.50, 0.75, 1.00};

struct ReductionPlan {
  double fraction = 1.0;
  std::size_t target_count = 0;
  std::uint64_t seed = 0;

  /// Uses the published per-fraction counts when the training set has the
  /// published size (2,122), floor(fraction * n) otherwise.
  static ReductionPlan for_fraction(double fraction, std::size_t train_size, std::uint64_t seed);
};

/// Stratified (by stress label) sample without replacement of the training
/// partition. Dev and test are copied unchanged; kept examples retain their
/// original relative order.
DatasetSplit reduce_training_set(const DatasetSplit& split, const ReductionPlan& plan);

// Canonical on-disk example format: a header line followed by one JSON
// record per line. The header carries the schema version, record count and
// a SHA-256 over the record lines.
inline constexpr int kCanonicalSchemaVersion = 1;

void write_canonical(const std::filesystem::path& path, std::span<const TextExample> examples);
std::string serialize_canonical(std::span<const TextExample> examples);
std::vector<TextExample> read_canonical(const std::filesystem::path& path);
std::vector<TextExample> parse_canonical(std::string_view contents);

/// Content checksum of an example list; identical to the checksum stored in
/// the canonical file header.
std::string dataset_fingerprint(std::span<const TextExample> examples);

}  // namespace emostress
