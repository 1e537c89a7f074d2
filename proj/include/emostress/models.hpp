// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emostress/corpus.hpp"
#include "emostress/emotaxonomy.hpp"
#include "emostress/encoder.hpp"

namespace emostress {

enum class Architecture { SingleTask, FineTune, MultiAlt, Multi };

inline constexpr std::array<Architecture, 4> kArchitectures = {
    Architecture::SingleTask, Architecture::FineTune, Architecture::MultiAlt, Architecture::Multi};

std::string_view to_string(Architecture a);     // "SINGLE_TASK", ...
std::string_view display_name(Architecture a);  // "Single-Task", ...
/// Accepts the enum spelling, the display name or the CLI short form
/// (single, finetune, multialt, multi).
Architecture architecture_from_string(std::string_view s);

enum class Task { Stress, Emotion };

inline constexpr std::size_t kStressClasses = 2;
inline constexpr int kPositiveClass = 1;  // index 1 = stressed, frozen in checkpoints

inline constexpr double kMinLearningRate = 1e-6;
inline constexpr double kMaxLearningRate = 1e-3;
inline constexpr double kMaxLambda = 0.9;

struct ModelConfig {
  Architecture architecture = Architecture::SingleTask;
  EncoderIdentity encoder;
  double dropout = 0.1;
  double learning_rate = 2e-5;
  std::optional<double> lambda;  // present iff architecture == Multi

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Which classification heads an assembly carries.
struct HeadSet {
  bool stress = true;
  bool emotion = false;

  static HeadSet for_task(Task t) { return t == Task::Stress ? HeadSet{true, false} : HeadSet{false, true}; }
  static HeadSet both() { return {true, true}; }
  bool has(Task t) const { return t == Task::Stress ? stress : emotion; }
};

/// Batch loss value plus its gradient with respect to the logits.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

/// Batch-mean negative log-likelihood of the softmax over 2 logits.
LossResult stress_loss(const Matrix& logits, std::span<const int> gold);
/// Batch mean of the per-example mean of 7 sigmoid cross-entropy terms.
LossResult emotion_loss(const Matrix& logits, std::span<const EmotionVector> gold);
/// lambda * stress + (1 - lambda) * emotion; lambda must lie in [0, 0.9].
double combined_loss(double stress, double emotion, double lambda);

/// Argmax over two logits; ties go to the negative class.
int stress_label_from_logits(std::span<const double> logits);
/// Labels with sigmoid >= threshold; the argmax label when none pass.
EmotionVector emotions_from_logits(std::span<const double> logits, double threshold = 0.5);

/// An encoder with a dropout + dense head per task. Multi-task assemblies
/// share one encoder object between both heads.
class AssembledModel {
 public:
  struct Output {
    TransformerEncoder::Tape tape;
    Matrix stress_input, emotion_input;  // pooled after per-head dropout
    Matrix stress_drop, emotion_drop;    // dropout masks (empty in eval mode)
    Matrix stress_logits, emotion_logits;
  };

  /// Heads are initialized from `init_seed` (Init stream).
  AssembledModel(ModelConfig config, TransformerEncoder encoder, HeadSet heads,
                 std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  HeadSet heads() const { return heads_; }
  TransformerEncoder& encoder() { return encoder_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  Linear& head(Task t);
  const Linear& head(Task t) const;

  /// Runs the encoder once and the requested heads on the pooled output.
  Output forward(std::span<const TokenizedInput> batch, HeadSet which, Mode mode,
                 Rng* dropout_rng) const;
  /// Accumulates gradients; a null logit gradient skips that head.
  void backward(const Output& out, const Matrix* dstress, const Matrix* demotion);

  /// Encoder parameters followed by the parameters of the selected heads.
  ParameterList parameters(HeadSet which);
  ParameterList parameters() { return parameters(heads_); }
  ConstParameterList parameters() const;
  void zero_grad();

  std::string fingerprint() const;
  std::string head_fingerprint(Task t) const;
  /// True while a head still holds exactly its initial weights.
  bool head_untouched(Task t) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// Writes encoder and head weights with the config and a caller-supplied
  /// manifest (JSON text) as metadata.
  void save(const std::filesystem::path& path, const std::string& manifest_json = "{}") const;
  /// Restores weights into a model built with the same config and heads.
  void load_weights(const std::filesystem::path& path);
  static std::string read_manifest(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  TransformerEncoder encoder_;
  HeadSet heads_;
  Linear stress_head_, emotion_head_;
  std::string stress_init_, emotion_init_;
  bool frozen_ = false;
};

struct StressPrediction {
  std::vector<int> labels;
  Matrix probabilities;  // n x 2, softmax
};

/// Eval-mode predictions in batches. Warns when the head is still at init.
StressPrediction predict_stress(const AssembledModel& model, std::span<const TextExample> examples,
                                std::size_t batch_size = 32);
std::vector<EmotionVector> predict_emotions(const AssembledModel& model,
                                            std::span<const TextExample> examples,
                                            double threshold = 0.5, std::size_t batch_size = 32);

/// Tokenizes every example with the model's tokenizer.
std::vector<TokenizedInput> tokenize_examples(const TransformerEncoder& encoder,
                                              std::span<const TextExample> examples);

}  // namespace emostress
