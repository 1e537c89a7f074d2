// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emostress/corpus.hpp"
#include "emostress/encoder.hpp"
#include "emostress/models.hpp"
#include "emostress/trainer.hpp"
#include "emostress/tuner.hpp"

namespace emostress {

/// Raised for any config problem; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusConfig {
  std::filesystem::path path;
  ColumnSchema schema;
  SplitCounts split;
};

struct TrainingConfig {
  std::size_t batch_size = 16;
  std::size_t eval_batch_size = 64;
  EarlyStopPolicy policy;
  std::optional<std::size_t> max_steps;
};

/// Hyperparameters of the emotion labeler used for pseudo-labels and the
/// distribution study. Not tuned.
struct LabelerConfig {
  std::optional<EncoderName> encoder;  // distribution study; defaults to the first encoder
  double learning_rate = 2e-5;
  double dropout = 0.1;
};

/// Everything a study needs. Paths are resolved against `workspace`.
struct RunConfig {
  std::filesystem::path workspace;
  std::filesystem::path output_dir = "runs";
  std::optional<std::filesystem::path> asset_cache;
  std::optional<std::filesystem::path> taxonomy;

  std::map<EncoderName, std::string> encoders;  // identity -> asset reference
  std::vector<Architecture> architectures{kArchitectures.begin(), kArchitectures.end()};

  CorpusConfig stress, minority, emotion;
  std::uint64_t split_seed = 0;
  std::uint64_t reduction_seed = 0;
  std::vector<double> reduction_fractions{kReductionFractions.begin(), kReductionFractions.end()};
  SeedSet seeds;

  TrainingConfig training;
  TunerOptions tuner;  // log_path is filled per cell
  bool tune = true;    // false: train every cell with default_model
  LabelerConfig labeler;
  std::size_t max_length = 512;
  std::size_t jobs = 1;
  std::uint64_t tiny_seed = TransformerEncoder::kTinyInitSeed;

  /// Parses and fully validates. Relative `workspace` is taken relative to
  /// `base_dir`. Unknown keys at any level are errors.
  static RunConfig parse(std::string_view json_text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  /// Canonical JSON of the resolved config, embedded in every manifest.
  std::string to_json() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path output_root() const { return resolve(output_dir); }
  std::filesystem::path asset_cache_dir() const;

  EncoderIdentity identity(EncoderName name) const;
  std::vector<EncoderName> encoder_names() const;  // study order
  TrainOptions train_options() const;
  /// Untuned defaults: lr 2e-5, dropout 0.1, lambda 0.5 for MULTI.
  ModelConfig default_model(Architecture a, EncoderName e) const;
  ModelConfig labeler_model(EncoderName e) const;
};

}  // namespace emostress
