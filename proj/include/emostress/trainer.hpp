// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emostress/corpus.hpp"
#include "emostress/evalkit.hpp"
#include "emostress/models.hpp"

namespace emostress {

struct EarlyStopPolicy {
  std::size_t max_epochs = 20;
  std::size_t patience = 5;
  double tolerance = 1e-4;
};

/// Tracks the monitored dev metric. An epoch counts as an improvement only
/// when it beats the best so far by strictly more than the tolerance.
class EarlyStopping {
 public:
  explicit EarlyStopping(EarlyStopPolicy policy = {});

  /// Records one epoch; returns true when it is a new best.
  bool observe(double metric);
  bool should_stop() const;

  std::size_t epochs() const { return epochs_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  std::size_t since_improvement() const { return since_improvement_; }
  const EarlyStopPolicy& policy() const { return policy_; }

  std::string to_json() const;
  void restore_json(const std::string& text);

 private:
  EarlyStopPolicy policy_;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_improvement_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

/// Adam with bias correction and per-parameter step counts, so parameters
/// that sit out some steps (an idle head) keep correct moment estimates.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(const ParameterList& params);
  double learning_rate() const { return lr_; }

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  struct Slot {
    Matrix m, v;
    std::uint64_t steps = 0;
  };
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, Slot> slots_;
};

/// Train and dev partitions only. Training and tuning code receives this
/// view, so it has no path to test data.
struct TrainDevView {
  std::string name;
  std::vector<TextExample> train;
  std::vector<TextExample> dev;

  static TrainDevView from_split(const DatasetSplit& split);
  std::string train_fingerprint() const { return dataset_fingerprint(train); }
  std::string dev_fingerprint() const { return dataset_fingerprint(dev); }
};

/// Records which partitions each phase touched. Shared by concurrent runs.
class DataAccessLog {
 public:
  struct Entry {
    std::string phase;      // train | tune | evaluate | label
    std::string dataset;
    std::string partition;  // train | dev | test
    std::string fingerprint;
    std::size_t count = 0;
  };

  void record(Entry e);
  std::vector<Entry> entries() const;
  /// Entries where a training or tuning phase read a test partition.
  std::vector<Entry> leaks() const;
  std::string to_jsonl() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

struct StepRecord {
  std::size_t step = 0;
  Task task = Task::Stress;
  double loss = 0.0;  // value the step differentiated
  std::optional<double> stress_loss, emotion_loss;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;  // cumulative optimizer steps
  double train_loss = 0.0;
  double dev_metric = 0.0;
  bool improved = false;
};

struct TrainOptions {
  std::size_t batch_size = 16;
  std::size_t eval_batch_size = 64;
  EarlyStopPolicy policy;
  std::optional<std::size_t> max_steps;  // hard cap on optimizer steps
  /// Multiplies emotion-batch gradients in alternating training (test hook).
  double emotion_loss_scale = 1.0;
  double pseudo_label_threshold = 0.5;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
  DataAccessLog* access_log = nullptr;
  std::string phase = "train";
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  AssembledModel model;  // best-dev weights, not the last epoch
  std::vector<EpochRecord> history;
  double best_dev = 0.0;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  std::string stop_reason;
};

enum class Procedure { SingleStress, SingleEmotion, Alternating, Joint };

/// One resumable training run. Construct, then call run() or drive epochs
/// one at a time with run_epoch(); save_state()/load_state() checkpoint
/// everything needed to continue with identical batches.
class TrainingSession {
 public:
  TrainingSession(AssembledModel model, Procedure procedure, const TrainDevView& primary,
                  const TrainDevView* emotion, TrainOptions options, std::uint64_t seed);

  /// Runs one epoch plus dev evaluation. Returns false once training is over.
  bool run_epoch();
  TrainResult run();
  /// Restores the best weights and packages the result.
  TrainResult finish();

  bool done() const { return done_; }
  const std::vector<EpochRecord>& history() const { return history_; }
  AssembledModel& model() { return model_; }

  void save_state(const std::filesystem::path& dir) const;
  void load_state(const std::filesystem::path& dir);

  /// Dev metric of the current weights (stress F1 or emotion macro F1).
  double evaluate_dev() const;

 private:
  struct Batch {
    Task task;
    std::vector<std::size_t> rows;
  };
  std::vector<Batch> plan_epoch();
  std::vector<std::size_t> next_emotion_batch();
  double train_step(const Batch& batch);
  void snapshot_best();

  AssembledModel model_;
  Procedure procedure_;
  TrainOptions options_;
  std::uint64_t seed_;

  std::vector<TokenizedInput> train_tokens_, emotion_tokens_;
  std::vector<int> train_stress_;
  std::vector<EmotionVector> train_emotions_, emotion_gold_;
  std::vector<TextExample> dev_;

  Adam adam_;
  Rng shuffle_rng_, dropout_rng_;
  EarlyStopping stopper_;
  std::vector<std::size_t> emotion_order_;
  std::size_t emotion_cursor_ = 0;
  std::vector<Matrix> best_weights_;
  std::vector<EpochRecord> history_;
  std::size_t steps_ = 0;
  bool done_ = false;
  std::string stop_reason_;
};

/// Strict S,E,S,E alternation for one epoch of `stress_batches` stress batches.
std::vector<Task> alternation_schedule(std::size_t stress_batches);

TrainResult train_single_task(const ModelConfig& config, const TransformerEncoder& encoder,
                              Task task, const TrainDevView& data, const TrainOptions& options,
                              std::uint64_t seed);

struct FineTuneResult {
  TrainResult emotion_stage;
  TrainResult stress_stage;
  std::string transferred_fingerprint;   // stage-1 final encoder
  std::string stage2_initial_fingerprint;
};

FineTuneResult train_fine_tune(const ModelConfig& config, const TransformerEncoder& encoder,
                               const TrainDevView& emotion, const TrainDevView& stress,
                               const TrainOptions& options, std::uint64_t seed);

TrainResult train_alternating(const ModelConfig& config, const TransformerEncoder& encoder,
                              const TrainDevView& emotion, const TrainDevView& stress,
                              const TrainOptions& options, std::uint64_t seed);

/// Attaches predicted emotion vectors (flagged as pseudo) to every example.
/// The labeler must be frozen.
std::vector<TextExample> pseudo_label_emotions(const AssembledModel& labeler,
                                               std::span<const TextExample> examples,
                                               double threshold = 0.5);

TrainResult train_joint(const ModelConfig& config, const TransformerEncoder& encoder,
                        const TrainDevView& labeled_stress, const TrainOptions& options,
                        std::uint64_t seed);

/// Exactly three seeds for reported numbers.
struct SeedSet {
  std::array<std::uint64_t, 3> seeds = {13, 42, 2024};
  static SeedSet from(std::span<const std::uint64_t> seeds);
};

struct RunResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<MetricReport> reports;  // one per evaluation set
};

struct SeededResult {
  std::vector<RunResult> runs;
  std::vector<MetricReport> mean;  // per evaluation set; empty when failed
  bool failed = false;
};

/// Runs `fn` once per seed. Any failing seed fails the whole cell.
SeededResult run_seeded(const std::function<std::vector<MetricReport>(std::uint64_t)>& fn,
                        const SeedSet& seeds);

/// Inputs for one architecture run.
struct ArchitectureData {
  TrainDevView stress;                  // stress train + tuning/early-stop dev
  std::optional<TrainDevView> emotion;  // required by FINE_TUNE, MULTI_ALT and MULTI
};

struct ArchitectureRun {
  TrainResult result;
  std::optional<FineTuneResult> fine_tune;
  std::optional<double> labeler_macro_f1;  // dev macro F1 of the MULTI labeler
};

/// Dispatches on config.architecture. For MULTI, `labeler` (frozen) is
/// used when given; otherwise an emotion model with the same encoder
/// identity is trained first.
ArchitectureRun train_architecture(const ModelConfig& config, const TransformerEncoder& encoder,
                                   const ArchitectureData& data, const TrainOptions& options,
                                   std::uint64_t seed, const AssembledModel* labeler = nullptr);

/// Trains a frozen emotion labeler (single-task emotion model).
AssembledModel train_emotion_labeler(const ModelConfig& config, const TransformerEncoder& encoder,
                                     const TrainDevView& emotion, const TrainOptions& options,
                                     std::uint64_t seed, double* dev_macro_f1 = nullptr);

/// Stress-side report of a model on a labeled set.
MetricReport evaluate_stress_model(const AssembledModel& model,
                                   std::span<const TextExample> examples,
                                   const std::string& eval_set, std::size_t batch_size = 64);
/// Emotion-side report (macro F1 filled) on gold-labeled examples.
MetricReport evaluate_emotion_model(const AssembledModel& model,
                                    std::span<const TextExample> examples,
                                    const std::string& eval_set, std::size_t batch_size = 64);

}  // namespace emostress
