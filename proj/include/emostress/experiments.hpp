// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emostress/corpus.hpp"
#include "emostress/evalkit.hpp"
#include "emostress/io/atomic_file.hpp"
#include "emostress/runconfig.hpp"
#include "emostress/trainer.hpp"

namespace emostress {

/// The three corpora loaded, relabeled and split as the config says.
struct PreparedCorpora {
  DatasetSplit stress, minority, emotion;
  std::map<std::string, std::size_t> rejected_rows;  // per corpus

  static PreparedCorpora load(const RunConfig& config);
  /// Canonical files plus a fingerprint index under `dir`.
  void write(const std::filesystem::path& dir) const;
  static PreparedCorpora read(const std::filesystem::path& dir);
};

/// Train/dev views for a cell. The designated dev set is the one used both
/// for tuning and for early stopping.
enum class DevChoice { Minority, Stress };
std::string_view to_string(DevChoice d);
DevChoice dev_choice_from_string(std::string_view s);  // "mstress" | "dreaddit" | "minority" | "stress"

ArchitectureData architecture_data(const PreparedCorpora& data, DevChoice dev,
                                   std::span<const TextExample> stress_train);

/// Loads each encoder once and hands out shared read-only copies. A missing
/// asset is remembered, so later cells fail fast with the same message.
class EncoderPool {
 public:
  explicit EncoderPool(const RunConfig& config) : config_(config) {}
  std::shared_ptr<const TransformerEncoder> get(EncoderName name);

 private:
  const RunConfig& config_;
  std::mutex mutex_;
  std::map<EncoderName, std::shared_ptr<const TransformerEncoder>> loaded_;
  std::map<EncoderName, std::string> failed_;
};

/// Append-only study output: one JSON record per line plus per-run
/// manifests written atomically.
class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path dir);

  void append(const std::string& json_line);
  /// runs/<cell>/seed-<seed>/manifest.json
  std::filesystem::path manifest_path(const std::string& cell, std::uint64_t seed) const;
  void write_manifest(const std::string& cell, std::uint64_t seed, const std::string& json) const;
  /// Returns the stored manifest when present and its key matches.
  std::optional<std::string> cached_manifest(const std::string& cell, std::uint64_t seed,
                                             const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::unique_ptr<io::AppendLog> log_;
};

/// One (architecture, encoder[, fraction]) cell of a study.
struct CellSpec {
  Architecture architecture;
  EncoderName encoder;
  std::optional<double> fraction;
  std::string id() const;  // filesystem-safe, e.g. "MULTI__ROBUST_MENTAL__f0.50"
};

struct CellOutcome {
  CellSpec spec;
  bool ok = false;
  std::string error;
  std::optional<ModelConfig> tuned;
  SeededResult seeded;
};

struct StudyOptions {
  std::filesystem::path out_dir;
  bool reuse_manifests = true;
};

struct PrimaryReport {
  ResultsGrid minority_test, stress_test, minority_dev;
  std::vector<CellOutcome> cells;
};

struct ReductionPoint {
  Architecture architecture;
  EncoderName encoder;
  double fraction = 1.0;
  std::size_t train_size = 0;
  std::optional<MetricReport> mean;  // empty when the cell failed
};

struct ReductionReport {
  std::vector<ReductionPoint> points;
  std::vector<CellOutcome> cells;
};

struct EmotionDistribution {
  std::string corpus;  // "minority" | "stress"
  std::optional<StressLabel> status;  // empty = whole corpus
  std::size_t n = 0;
  std::array<double, kEmotionCount> proportions{};
};

struct DistributionReport {
  EncoderName labeler_encoder;
  double labeler_macro_f1 = 0.0;  // on the emotion test split
  std::vector<EmotionDistribution> groups;
  double cross_corpus_l1 = 0.0;
  std::map<std::string, double> within_corpus_l1;  // stressed vs not, per corpus
  bool ordering_holds = false;  // cross-corpus exceeds every within-corpus distance
};

double l1_distance(const std::array<double, kEmotionCount>& a, const std::array<double, kEmotionCount>& b);
EmotionDistribution emotion_distribution(std::string corpus, std::optional<StressLabel> status,
                                         std::span<const TextExample> labeled);

/// Every (architecture, encoder) cell: tune on minority dev, train each
/// seed, evaluate on minority test, stress test and minority dev.
PrimaryReport primary_matrix(const RunConfig& config, const PreparedCorpora& data,
                             const StudyOptions& options);

/// Single-Task and MULTI on reduced stress training sets, tuned on stress
/// dev and evaluated on stress test.
ReductionReport data_reduction_study(const RunConfig& config, const PreparedCorpora& data,
                                     const StudyOptions& options);

/// Pseudo-labels both stress corpora with an emotion labeler and compares
/// the label distributions.
DistributionReport emotion_distribution_study(const RunConfig& config, const PreparedCorpora& data,
                                              const StudyOptions& options);

/// One line per planned unit of work, for --dry-run.
std::vector<std::string> plan_study(const RunConfig& config, std::string_view study);

/// Rebuilds the primary grids from a study directory's results records.
PrimaryReport load_primary_report(const std::filesystem::path& dir);

}  // namespace emostress
