// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/core/hash.hpp"
#include "emostress/io/safetensors.hpp"

namespace emostress {

using nlohmann::json;

namespace {

void require_finite(const Matrix& logits, const char* what) {
  for (double v : logits.values())
    if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": non-finite logit");
}

double log_sum_exp2(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string head_prefix(Task t) { return t == Task::Stress ? "heads.stress" : "heads.emotion"; }

}  // namespace

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::SingleTask: return "SINGLE_TASK";
    case Architecture::FineTune: return "FINE_TUNE";
    case Architecture::MultiAlt: return "MULTI_ALT";
    case Architecture::Multi: return "MULTI";
  }
  throw std::invalid_argument("bad architecture");
}

std::string_view display_name(Architecture a) {
  switch (a) {
    case Architecture::SingleTask: return "Single-Task";
    case Architecture::FineTune: return "Fine-Tune";
    case Architecture::MultiAlt: return "Multi-Alt";
    case Architecture::Multi: return "Multi";
  }
  throw std::invalid_argument("bad architecture");
}

Architecture architecture_from_string(std::string_view s) {
  static constexpr std::array<std::string_view, 4> kShort = {"single", "finetune", "multialt",
                                                             "multi"};
  for (std::size_t i = 0; i < kArchitectures.size(); ++i) {
    const Architecture a = kArchitectures[i];
    if (s == to_string(a) || s == display_name(a) || s == kShort[i]) return a;
  }
  throw std::invalid_argument("unknown architecture '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (!(dropout >= 0.0 && dropout <= 1.0))
    throw std::invalid_argument("dropout must lie in [0, 1]");
  if (!(learning_rate >= kMinLearningRate && learning_rate <= kMaxLearningRate))
    throw std::invalid_argument("learning rate must lie in [1e-6, 1e-3]");
  if (architecture == Architecture::Multi) {
    if (!lambda) throw std::invalid_argument("MULTI needs a lambda");
    if (!(*lambda >= 0.0 && *lambda <= kMaxLambda))
      throw std::invalid_argument("lambda must lie in [0, 0.9]");
  } else if (lambda) {
    throw std::invalid_argument("lambda is only meaningful for MULTI");
  }
}

std::string ModelConfig::to_json() const {
  json j = {{"architecture", to_string(architecture)},
            {"encoder",
             {{"name", to_string(encoder.name)},
              {"asset_ref", encoder.asset_ref},
              {"expected_params", encoder.expected_params}}},
            {"dropout", dropout},
            {"learning_rate", learning_rate},
            {"lambda", lambda ? json(*lambda) : json(nullptr)}};
  return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  const json j = json::parse(text);
  ModelConfig c;
  c.architecture = architecture_from_string(j.at("architecture").get<std::string>());
  const json& e = j.at("encoder");
  c.encoder.name = encoder_from_string(e.at("name").get<std::string>());
  c.encoder.asset_ref = e.value("asset_ref", std::string{});
  c.encoder.expected_params = e.value("expected_params", std::size_t{0});
  c.dropout = j.at("dropout");
  c.learning_rate = j.at("learning_rate");
  if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = j["lambda"].get<double>();
  return c;
}

LossResult stress_loss(const Matrix& logits, std::span<const int> gold) {
  if (logits.cols() != kStressClasses) throw std::invalid_argument("stress logits must be 2 wide");
  if (logits.rows() != gold.size() || gold.empty())
    throw std::invalid_argument("stress loss: batch size mismatch");
  require_finite(logits, "stress_loss");
  LossResult r;
  r.grad.resize(logits.rows(), kStressClasses);
  const double inv_n = 1.0 / static_cast<double>(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] != 0 && gold[i] != 1) throw std::invalid_argument("stress label must be 0 or 1");
    const double a = logits(i, 0), b = logits(i, 1);
    const double lse = log_sum_exp2(a, b);
    const auto g = static_cast<std::size_t>(gold[i]);
    r.value += (lse - logits(i, g)) * inv_n;
    for (std::size_t c = 0; c < kStressClasses; ++c) {
      const double p = std::exp(logits(i, c) - lse);
      r.grad(i, c) = (p - (c == g ? 1.0 : 0.0)) * inv_n;
    }
  }
  return r;
}

LossResult emotion_loss(const Matrix& logits, std::span<const EmotionVector> gold) {
  if (logits.cols() != kEmotionCount) throw std::invalid_argument("emotion logits must be 7 wide");
  if (logits.rows() != gold.size() || gold.empty())
    throw std::invalid_argument("emotion loss: batch size mismatch");
  require_finite(logits, "emotion_loss");
  LossResult r;
  r.grad.resize(logits.rows(), kEmotionCount);
  const double scale = 1.0 / static_cast<double>(gold.size() * kEmotionCount);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      const double z = logits(i, k);
      const double y = gold[i].test(k) ? 1.0 : 0.0;
      r.value += (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)))) * scale;
      r.grad(i, k) = (sigmoid(z) - y) * scale;
    }
  }
  return r;
}

double combined_loss(double stress, double emotion, double lambda) {
  if (!(lambda >= 0.0 && lambda <= kMaxLambda))
    throw std::invalid_argument("lambda must lie in [0, 0.9]");
  return lambda * stress + (1.0 - lambda) * emotion;
}

int stress_label_from_logits(std::span<const double> logits) {
  if (logits.size() != kStressClasses) throw std::invalid_argument("stress logits must be 2 wide");
  return logits[1] > logits[0] ? 1 : 0;
}

EmotionVector emotions_from_logits(std::span<const double> logits, double threshold) {
  if (logits.size() != kEmotionCount) throw std::invalid_argument("emotion logits must be 7 wide");
  EmotionVector v;
  std::size_t best = 0;
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    if (sigmoid(logits[k]) >= threshold) v.set(k);
    if (logits[k] > logits[best]) best = k;
  }
  if (v.none()) v.set(best);
  return v;
}

AssembledModel::AssembledModel(ModelConfig config, TransformerEncoder encoder, HeadSet heads,
                               std::uint64_t init_seed)
    : config_(std::move(config)), encoder_(std::move(encoder)), heads_(heads) {
  config_.validate();
  if (config_.encoder.name != encoder_.identity().name)
    throw std::invalid_argument("model config names a different encoder");
  if (!heads_.stress && !heads_.emotion) throw std::invalid_argument("model needs a head");
  const std::size_t width = encoder_.hidden_size();
  stress_head_ = Linear(head_prefix(Task::Stress), width, kStressClasses);
  emotion_head_ = Linear(head_prefix(Task::Emotion), width, kEmotionCount);
  Rng rng(init_seed, RngStream::Init);
  stress_head_.init_normal(rng, 0.02);
  emotion_head_.init_normal(rng, 0.02);
  stress_init_ = head_fingerprint(Task::Stress);
  emotion_init_ = head_fingerprint(Task::Emotion);
}

Linear& AssembledModel::head(Task t) {
  if (!heads_.has(t)) throw std::logic_error("model has no such head");
  return t == Task::Stress ? stress_head_ : emotion_head_;
}

const Linear& AssembledModel::head(Task t) const {
  return const_cast<AssembledModel*>(this)->head(t);
}

AssembledModel::Output AssembledModel::forward(std::span<const TokenizedInput> batch,
                                               HeadSet which, Mode mode, Rng* dropout_rng) const {
  if ((which.stress && !heads_.stress) || (which.emotion && !heads_.emotion))
    throw std::logic_error("requested a head the model does not carry");
  Output out;
  out.tape = encoder_.forward(batch, mode, dropout_rng);
  Rng* drop = mode == Mode::Train ? dropout_rng : nullptr;
  const Matrix& pooled = out.tape.pooled;
  auto run_head = [&](const Linear& h, Matrix& input, Matrix& mask, Matrix& logits) {
    if (pooled.cols() != h.in_features())
      throw std::invalid_argument("encoder width does not match the head");
    input = pooled;
    mask = make_dropout_mask(pooled.rows(), pooled.cols(), config_.dropout, drop);
    apply_mask(input, mask);
    h.forward(input, logits);
  };
  if (which.stress) run_head(stress_head_, out.stress_input, out.stress_drop, out.stress_logits);
  if (which.emotion)
    run_head(emotion_head_, out.emotion_input, out.emotion_drop, out.emotion_logits);
  return out;
}

void AssembledModel::backward(const Output& out, const Matrix* dstress, const Matrix* demotion) {
  if (frozen_) throw std::logic_error("model is frozen");
  Matrix dpooled(out.tape.pooled.rows(), out.tape.pooled.cols());
  Matrix tmp;
  auto through_head = [&](Linear& h, const Matrix& input, const Matrix& mask,
                          const Matrix& dlogits) {
    h.backward(input, dlogits, &tmp);
    apply_mask(tmp, mask);
    for (std::size_t i = 0; i < dpooled.size(); ++i) dpooled.data()[i] += tmp.data()[i];
  };
  if (dstress) through_head(head(Task::Stress), out.stress_input, out.stress_drop, *dstress);
  if (demotion)
    through_head(head(Task::Emotion), out.emotion_input, out.emotion_drop, *demotion);
  encoder_.backward(out.tape, dpooled);
}

ParameterList AssembledModel::parameters(HeadSet which) {
  ParameterList out = encoder_.parameters();
  if (which.stress) head(Task::Stress).collect(out);
  if (which.emotion) head(Task::Emotion).collect(out);
  return out;
}

ConstParameterList AssembledModel::parameters() const {
  ParameterList list = const_cast<AssembledModel*>(this)->parameters(heads_);
  return ConstParameterList(list.begin(), list.end());
}

void AssembledModel::zero_grad() {
  encoder_.zero_grad();
  stress_head_.weight.zero_grad();
  stress_head_.bias.zero_grad();
  emotion_head_.weight.zero_grad();
  emotion_head_.bias.zero_grad();
}

std::string AssembledModel::fingerprint() const { return emostress::fingerprint(parameters()); }

std::string AssembledModel::head_fingerprint(Task t) const {
  const Linear& h = t == Task::Stress ? stress_head_ : emotion_head_;
  ConstParameterList list;
  h.collect(list);
  return emostress::fingerprint(list);
}

bool AssembledModel::head_untouched(Task t) const {
  return head_fingerprint(t) == (t == Task::Stress ? stress_init_ : emotion_init_);
}

void AssembledModel::save(const std::filesystem::path& path, const std::string& manifest_json) const {
  io::TensorFile file;
  for (const Parameter* p : parameters()) {
    const std::string name = p->name.rfind("heads.", 0) == 0 ? p->name : "encoder." + p->name;
    file.tensors[name] = io::Tensor{{p->value.rows(), p->value.cols()},
                                    {p->value.values().begin(), p->value.values().end()}};
  }
  file.metadata["format"] = "emostress-model";
  file.metadata["config"] = config_.to_json();
  file.metadata["heads"] = std::string(heads_.stress ? "stress" : "") +
                           (heads_.stress && heads_.emotion ? "," : "") +
                           (heads_.emotion ? "emotion" : "");
  file.metadata["positive_class"] = std::to_string(kPositiveClass);
  file.metadata["fingerprint"] = fingerprint();
  file.metadata["manifest"] = manifest_json;
  io::write_safetensors(path, file);
}

void AssembledModel::load_weights(const std::filesystem::path& path) {
  const io::TensorFile file = io::read_safetensors(path);
  auto it = file.metadata.find("format");
  if (it == file.metadata.end() || it->second != "emostress-model")
    throw std::runtime_error(path.string() + ": not a model checkpoint");
  const ModelConfig saved = ModelConfig::from_json(file.metadata.at("config"));
  if (saved.encoder.name != config_.encoder.name || saved.architecture != config_.architecture)
    throw std::invalid_argument(path.string() + ": checkpoint is for a different model");
  if (file.metadata.at("positive_class") != std::to_string(kPositiveClass))
    throw std::runtime_error(path.string() + ": incompatible class index convention");
  for (Parameter* p : parameters()) {
    const std::string name = p->name.rfind("heads.", 0) == 0 ? p->name : "encoder." + p->name;
    auto t = file.tensors.find(name);
    if (t == file.tensors.end()) throw std::runtime_error(path.string() + ": lacks " + name);
    if (t->second.element_count() != p->value.size())
      throw std::runtime_error(name + ": shape mismatch");
    std::copy(t->second.values.begin(), t->second.values.end(), p->value.data());
  }
  if (fingerprint() != file.metadata.at("fingerprint"))
    throw std::runtime_error(path.string() + ": fingerprint mismatch after load");
  config_ = saved;
}

std::string AssembledModel::read_manifest(const std::filesystem::path& path) {
  const io::TensorFile file = io::read_safetensors(path);
  auto it = file.metadata.find("manifest");
  return it == file.metadata.end() ? "{}" : it->second;
}

std::vector<TokenizedInput> tokenize_examples(const TransformerEncoder& encoder,
                                              std::span<const TextExample> examples) {
  std::vector<TokenizedInput> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(encoder.tokenize(ex.text));
  return out;
}

namespace {

template <typename Fn>
void for_each_batch(const AssembledModel& model, std::span<const TextExample> examples,
                    std::size_t batch_size, HeadSet which, Fn&& fn) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const auto chunk = examples.subspan(start, std::min(batch_size, examples.size() - start));
    const auto tokens = tokenize_examples(model.encoder(), chunk);
    fn(start, model.forward(tokens, which, Mode::Eval, nullptr));
  }
}

void warn_if_untrained(const AssembledModel& model, Task t) {
  if (model.head_untouched(t))
    spdlog::warn("{} head still holds its initial weights; predictions are untrained",
                 t == Task::Stress ? "stress" : "emotion");
}

}  // namespace

StressPrediction predict_stress(const AssembledModel& model, std::span<const TextExample> examples,
                                std::size_t batch_size) {
  warn_if_untrained(model, Task::Stress);
  StressPrediction pred;
  pred.labels.resize(examples.size());
  pred.probabilities.resize(examples.size(), kStressClasses);
  for_each_batch(model, examples, batch_size, HeadSet::for_task(Task::Stress),
                 [&](std::size_t start, const AssembledModel::Output& out) {
                   for (std::size_t i = 0; i < out.stress_logits.rows(); ++i) {
                     const auto row = out.stress_logits.row(i);
                     pred.labels[start + i] = stress_label_from_logits(row);
                     const double lse = log_sum_exp2(row[0], row[1]);
                     pred.probabilities(start + i, 0) = std::exp(row[0] - lse);
                     pred.probabilities(start + i, 1) = std::exp(row[1] - lse);
                   }
                 });
  return pred;
}

std::vector<EmotionVector> predict_emotions(const AssembledModel& model,
                                            std::span<const TextExample> examples,
                                            double threshold, std::size_t batch_size) {
  warn_if_untrained(model, Task::Emotion);
  std::vector<EmotionVector> out(examples.size());
  for_each_batch(model, examples, batch_size, HeadSet::for_task(Task::Emotion),
                 [&](std::size_t start, const AssembledModel::Output& o) {
                   for (std::size_t i = 0; i < o.emotion_logits.rows(); ++i)
                     out[start + i] = emotions_from_logits(o.emotion_logits.row(i), threshold);
                 });
  return out;
}

}  // namespace emostress
