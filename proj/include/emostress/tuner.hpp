// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emostress/models.hpp"
#include "emostress/trainer.hpp"

namespace emostress {

/// Learning rate is searched on a log scale, dropout and lambda linearly.
/// The lambda dimension exists only for the joint (Multi) architecture.
struct SearchSpace {
  static constexpr double kMinLearningRate = 1e-6;
  static constexpr double kMaxLearningRate = 1e-3;
  static constexpr double kMinDropout = 0.0;
  static constexpr double kMaxDropout = 1.0;
  static constexpr double kMinLambda = 0.0;
  static constexpr double kMaxLambda = 0.9;

  Architecture architecture = Architecture::SingleTask;

  std::size_t dimensions() const { return has_lambda() ? 3 : 2; }
  bool has_lambda() const { return architecture == Architecture::Multi; }

  /// Maps a point of the unit cube onto a config derived from `base`.
  ModelConfig decode(std::span<const double> unit, const ModelConfig& base) const;
  std::vector<double> encode(const ModelConfig& config) const;
  std::vector<double> sample_unit(Rng& rng) const;
  bool contains(const ModelConfig& config) const;
};

enum class TrialStatus { Ok, Failed };

struct Trial {
  std::size_t index = 0;
  ModelConfig config;
  double criterion = 0.0;  // dev F1 of the trial's best epoch
  TrialStatus status = TrialStatus::Ok;
  std::string error;
  double seconds = 0.0;

  std::string to_json() const;
};

enum class TunerStrategy { Bayesian, Random };

std::string_view to_string(TunerStrategy s);
TunerStrategy tuner_strategy_from_string(std::string_view s);

struct TunerOptions {
  std::size_t budget = 20;
  TunerStrategy strategy = TunerStrategy::Bayesian;
  std::uint64_t seed = 0;
  /// Random trials before the surrogate model takes over.
  std::size_t initial_random = 5;
  /// Candidates scored by expected improvement per proposal.
  std::size_t candidates = 2000;
  /// Concurrent trials; only the random strategy runs trials in parallel.
  std::size_t workers = 1;
  /// Line-delimited trial log, one record appended per finished trial.
  std::optional<std::filesystem::path> log_path;
};

class TuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TuneResult {
  ModelConfig best;
  Trial best_trial;
  std::vector<Trial> trials;  // in proposal order, failures included
};

/// Returns the criterion to maximize for a proposed config. Throwing marks
/// the trial failed without ending the search.
using Objective = std::function<double(const ModelConfig&)>;

/// Searches around `base` (architecture and encoder are kept). Throws
/// TuningError when every trial fails, std::invalid_argument on budget 0.
TuneResult tune(const ModelConfig& base, const Objective& objective, const TunerOptions& options);

/// Objective that trains `base.architecture` on the train partitions and
/// scores dev F1 of the stress view. Only train and dev are reachable.
/// When `labeler` is given, the joint architecture reuses it across trials.
Objective make_training_objective(const TransformerEncoder& encoder, const ArchitectureData& data,
                                  TrainOptions options, std::uint64_t seed,
                                  const AssembledModel* labeler = nullptr);

}  // namespace emostress
