// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/io/atomic_file.hpp"
#include "emostress/io/safetensors.hpp"

namespace emostress {

using nlohmann::json;

// ---------------------------------------------------------------- stopping

EarlyStopping::EarlyStopping(EarlyStopPolicy policy) : policy_(policy) {
  if (policy_.max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (policy_.tolerance < 0.0) throw std::invalid_argument("tolerance must be non-negative");
}

bool EarlyStopping::observe(double metric) {
  ++epochs_;
  if (metric > best_ + policy_.tolerance) {
    best_ = metric;
    best_epoch_ = epochs_;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

bool EarlyStopping::should_stop() const {
  return epochs_ >= policy_.max_epochs || since_improvement_ >= policy_.patience;
}

std::string EarlyStopping::to_json() const {
  return json{{"epochs", epochs_},
              {"best_epoch", best_epoch_},
              {"since_improvement", since_improvement_},
              {"best", std::isfinite(best_) ? json(best_) : json(nullptr)}}
      .dump();
}

void EarlyStopping::restore_json(const std::string& text) {
  const json j = json::parse(text);
  epochs_ = j.at("epochs");
  best_epoch_ = j.at("best_epoch");
  since_improvement_ = j.at("since_improvement");
  best_ = j.at("best").is_null() ? -std::numeric_limits<double>::infinity()
                                 : j.at("best").get<double>();
}

// ---------------------------------------------------------------- adam

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr_ > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void Adam::step(const ParameterList& params) {
  for (Parameter* p : params) {
    Slot& s = slots_[p->name];
    if (s.m.empty()) {
      s.m.resize(p->value.rows(), p->value.cols());
      s.v.resize(p->value.rows(), p->value.cols());
    }
    ++s.steps;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s.steps));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s.steps));
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m = s.m.data();
    double* v = s.v.data();
    const std::size_t n = p->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

void Adam::save(const std::filesystem::path& path) const {
  io::TensorFile file;
  json steps = json::object();
  for (const auto& [name, s] : slots_) {
    file.tensors["m/" + name] = io::Tensor{{s.m.rows(), s.m.cols()}, {s.m.values().begin(), s.m.values().end()}};
    file.tensors["v/" + name] = io::Tensor{{s.v.rows(), s.v.cols()}, {s.v.values().begin(), s.v.values().end()}};
    steps[name] = s.steps;
  }
  file.metadata["steps"] = steps.dump();
  io::write_safetensors(path, file);
}

void Adam::load(const std::filesystem::path& path) {
  const io::TensorFile file = io::read_safetensors(path);
  const json steps = json::parse(file.metadata.at("steps"));
  slots_.clear();
  for (const auto& [name, count] : steps.items()) {
    Slot s;
    for (auto [prefix, target] : {std::pair{"m/", &s.m}, std::pair{"v/", &s.v}}) {
      const io::Tensor& t = file.tensors.at(prefix + name);
      target->resize(t.shape.at(0), t.shape.at(1));
      std::copy(t.values.begin(), t.values.end(), target->data());
    }
    s.steps = count.get<std::uint64_t>();
    slots_[name] = std::move(s);
  }
}

// ---------------------------------------------------------------- data views

TrainDevView TrainDevView::from_split(const DatasetSplit& split) {
  return TrainDevView{split.name, split.train, split.dev};
}

void DataAccessLog::record(Entry e) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(e));
}

std::vector<DataAccessLog::Entry> DataAccessLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::vector<DataAccessLog::Entry> DataAccessLog::leaks() const {
  std::vector<Entry> out;
  for (const auto& e : entries())
    if ((e.phase == "train" || e.phase == "tune") && e.partition == "test") out.push_back(e);
  return out;
}

std::string DataAccessLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries()) {
    nlohmann::ordered_json j = {{"phase", e.phase},
                                {"dataset", e.dataset},
                                {"partition", e.partition},
                                {"fingerprint", e.fingerprint},
                                {"count", e.count}};
    out += j.dump() + '\n';
  }
  return out;
}

// ---------------------------------------------------------------- session

namespace {

void log_access(const TrainOptions& o, const std::string& dataset, const std::string& partition,
                std::span<const TextExample> examples) {
  if (o.access_log == nullptr) return;
  o.access_log->record({o.phase, dataset, partition, dataset_fingerprint(examples), examples.size()});
}

std::vector<int> stress_labels(std::span<const TextExample> examples, const char* what) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    if (!ex.stress) throw TrainingError(std::string(what) + ": example '" + ex.id + "' has no stress label");
    out.push_back(static_cast<int>(*ex.stress));
  }
  return out;
}

std::vector<EmotionVector> emotion_labels(std::span<const TextExample> examples, const char* what) {
  std::vector<EmotionVector> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    if (!ex.emotions)
      throw TrainingError(std::string(what) + ": example '" + ex.id + "' has no emotion vector");
    out.push_back(*ex.emotions);
  }
  return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& all, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(all[r]);
  return out;
}

void scale(Matrix& m, double s) {
  for (double& v : m.values()) v *= s;
}

bool uses_emotion_dev(Procedure p) { return p == Procedure::SingleEmotion; }

}  // namespace

std::vector<Task> alternation_schedule(std::size_t stress_batches) {
  std::vector<Task> out;
  out.reserve(2 * stress_batches);
  for (std::size_t i = 0; i < stress_batches; ++i) {
    out.push_back(Task::Stress);
    out.push_back(Task::Emotion);
  }
  return out;
}

TrainingSession::TrainingSession(AssembledModel model, Procedure procedure,
                                 const TrainDevView& primary, const TrainDevView* emotion,
                                 TrainOptions options, std::uint64_t seed)
    : model_(std::move(model)),
      procedure_(procedure),
      options_(std::move(options)),
      seed_(seed),
      adam_(model_.config().learning_rate),
      shuffle_rng_(seed, RngStream::Shuffle),
      dropout_rng_(seed, RngStream::Dropout),
      stopper_(options_.policy) {
  if (options_.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (primary.train.empty()) throw TrainingError(primary.name + ": empty training split");
  if (primary.dev.empty()) throw TrainingError(primary.name + ": empty dev split");
  const HeadSet heads = model_.heads();

  switch (procedure_) {
    case Procedure::SingleStress:
      if (!heads.stress) throw std::invalid_argument("stress training needs a stress head");
      train_stress_ = stress_labels(primary.train, "stress training");
      break;
    case Procedure::SingleEmotion:
      if (!heads.emotion) throw std::invalid_argument("emotion training needs an emotion head");
      train_emotions_ = emotion_labels(primary.train, "emotion training");
      break;
    case Procedure::Alternating:
      if (!heads.stress || !heads.emotion) throw std::invalid_argument("alternating needs both heads");
      if (emotion == nullptr || emotion->train.empty())
        throw TrainingError("alternating training needs a non-empty emotion split");
      train_stress_ = stress_labels(primary.train, "stress training");
      emotion_gold_ = emotion_labels(emotion->train, "emotion training");
      break;
    case Procedure::Joint:
      if (!heads.stress || !heads.emotion) throw std::invalid_argument("joint training needs both heads");
      if (!model_.config().lambda) throw std::invalid_argument("joint training needs lambda");
      train_stress_ = stress_labels(primary.train, "joint training");
      train_emotions_ = emotion_labels(primary.train, "joint training (missing pseudo labels)");
      break;
  }
  if (uses_emotion_dev(procedure_)) emotion_labels(primary.dev, "emotion dev");
  else stress_labels(primary.dev, "stress dev");

  log_access(options_, primary.name, "train", primary.train);
  log_access(options_, primary.name, "dev", primary.dev);
  train_tokens_ = tokenize_examples(model_.encoder(), primary.train);
  dev_ = primary.dev;
  if (procedure_ == Procedure::Alternating) {
    log_access(options_, emotion->name, "train", emotion->train);
    emotion_tokens_ = tokenize_examples(model_.encoder(), emotion->train);
  }
}

std::vector<std::size_t> TrainingSession::next_emotion_batch() {
  std::vector<std::size_t> rows;
  while (rows.size() < options_.batch_size) {
    if (emotion_cursor_ >= emotion_order_.size()) {
      emotion_order_.resize(emotion_tokens_.size());
      std::iota(emotion_order_.begin(), emotion_order_.end(), std::size_t{0});
      shuffle_rng_.shuffle(std::span(emotion_order_));
      emotion_cursor_ = 0;
    }
    rows.push_back(emotion_order_[emotion_cursor_++]);
  }
  return rows;
}

std::vector<TrainingSession::Batch> TrainingSession::plan_epoch() {
  std::vector<std::size_t> order(train_tokens_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_rng_.shuffle(std::span(order));
  const Task primary_task = procedure_ == Procedure::SingleEmotion ? Task::Emotion : Task::Stress;
  std::vector<Batch> primary;
  for (std::size_t start = 0; start < order.size(); start += options_.batch_size) {
    const std::size_t end = std::min(order.size(), start + options_.batch_size);
    primary.push_back({primary_task, {order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(end)}});
  }
  if (procedure_ != Procedure::Alternating) return primary;
  std::vector<Batch> plan;
  std::size_t next_stress = 0;
  for (Task t : alternation_schedule(primary.size())) {
    if (t == Task::Stress) plan.push_back(std::move(primary[next_stress++]));
    else plan.push_back({Task::Emotion, next_emotion_batch()});
  }
  return plan;
}

double TrainingSession::train_step(const Batch& batch) {
  const bool from_emotion_corpus = procedure_ == Procedure::Alternating && batch.task == Task::Emotion;
  const auto tokens = gather(from_emotion_corpus ? emotion_tokens_ : train_tokens_, batch.rows);
  StepRecord rec;
  rec.step = steps_ + 1;
  rec.task = batch.task;

  HeadSet active;
  switch (procedure_) {
    case Procedure::SingleStress: active = {true, false}; break;
    case Procedure::SingleEmotion: active = {false, true}; break;
    case Procedure::Alternating: active = HeadSet::for_task(batch.task); break;
    case Procedure::Joint: active = HeadSet::both(); break;
  }

  model_.zero_grad();
  try {
    const auto out = model_.forward(tokens, active, Mode::Train, &dropout_rng_);
    std::optional<LossResult> ls, le;
    if (active.stress) {
      ls = stress_loss(out.stress_logits, gather(train_stress_, batch.rows));
      rec.stress_loss = ls->value;
    }
    if (active.emotion) {
      const auto gold = gather(from_emotion_corpus ? emotion_gold_ : train_emotions_, batch.rows);
      le = emotion_loss(out.emotion_logits, gold);
      rec.emotion_loss = le->value;
    }
    if (procedure_ == Procedure::Joint) {
      const double lambda = *model_.config().lambda;
      rec.loss = combined_loss(ls->value, le->value, lambda);
      scale(ls->grad, lambda);
      scale(le->grad, 1.0 - lambda);
    } else if (ls) {
      rec.loss = ls->value;
    } else {
      rec.loss = le->value;
      if (from_emotion_corpus) scale(le->grad, options_.emotion_loss_scale);
    }
    if (!std::isfinite(rec.loss)) throw std::domain_error("non-finite loss");
    model_.backward(out, ls ? &ls->grad : nullptr, le ? &le->grad : nullptr);
  } catch (const std::domain_error& e) {
    std::ostringstream msg;
    msg << "training diverged at epoch " << history_.size() + 1 << ", step " << rec.step << " ("
        << (batch.task == Task::Stress ? "stress" : "emotion") << " batch, lr "
        << model_.config().learning_rate << "): " << e.what();
    throw TrainingError(msg.str());
  }
  adam_.step(model_.parameters(active));
  ++steps_;
  if (options_.on_step) options_.on_step(rec);
  return rec.loss;
}

double TrainingSession::evaluate_dev() const {
  if (uses_emotion_dev(procedure_)) {
    const auto pred = predict_emotions(model_, dev_, options_.pseudo_label_threshold,
                                       options_.eval_batch_size);
    const auto gold = emotion_labels(dev_, "emotion dev");
    return macro_f1(pred, gold).value;
  }
  const auto pred = predict_stress(model_, dev_, options_.eval_batch_size);
  return binary_f1(pred.labels, stress_labels(dev_, "stress dev")).value;
}

void TrainingSession::snapshot_best() {
  best_weights_.clear();
  for (const Parameter* p : std::as_const(model_).parameters()) best_weights_.push_back(p->value);
}

bool TrainingSession::run_epoch() {
  if (done_) return false;
  const auto plan = plan_epoch();
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (const auto& batch : plan) {
    if (options_.max_steps && steps_ >= *options_.max_steps) break;
    loss_sum += train_step(batch);
    ++batches;
  }
  EpochRecord rec;
  rec.epoch = history_.size() + 1;
  rec.steps = steps_;
  rec.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
  rec.dev_metric = evaluate_dev();
  rec.improved = stopper_.observe(rec.dev_metric);
  if (rec.improved) snapshot_best();
  history_.push_back(rec);
  if (options_.on_epoch) options_.on_epoch(rec);
  spdlog::debug("epoch {} steps {} loss {:.5f} dev {:.2f}{}", rec.epoch, rec.steps, rec.train_loss,
                rec.dev_metric, rec.improved ? " *" : "");

  if (options_.max_steps && steps_ >= *options_.max_steps) {
    done_ = true;
    stop_reason_ = "max_steps";
  } else if (stopper_.should_stop()) {
    done_ = true;
    stop_reason_ = stopper_.epochs() >= options_.policy.max_epochs ? "max_epochs" : "patience";
  }
  return !done_;
}

TrainResult TrainingSession::run() {
  while (run_epoch()) {
  }
  return finish();
}

TrainResult TrainingSession::finish() {
  if (history_.empty()) throw std::logic_error("finish() before any epoch");
  const ParameterList params = model_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_weights_.at(i);
  return TrainResult{std::move(model_), history_, stopper_.best(), stopper_.best_epoch(), steps_,
                     stop_reason_.empty() ? "interrupted" : stop_reason_};
}

void TrainingSession::save_state(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  model_.save(dir / "model.safetensors");
  adam_.save(dir / "adam.safetensors");
  io::TensorFile best;
  const auto params = model_.parameters();
  for (std::size_t i = 0; i < best_weights_.size(); ++i) {
    const Matrix& m = best_weights_[i];
    best.tensors[params[i]->name] = io::Tensor{{m.rows(), m.cols()}, {m.values().begin(), m.values().end()}};
  }
  io::write_safetensors(dir / "best.safetensors", best);
  json history = json::array();
  for (const auto& h : history_)
    history.push_back({{"epoch", h.epoch}, {"steps", h.steps}, {"train_loss", h.train_loss},
                       {"dev_metric", h.dev_metric}, {"improved", h.improved}});
  const json state = {{"seed", seed_},
                      {"steps", steps_},
                      {"done", done_},
                      {"stop_reason", stop_reason_},
                      {"shuffle_rng", shuffle_rng_.serialize()},
                      {"dropout_rng", dropout_rng_.serialize()},
                      {"emotion_order", emotion_order_},
                      {"emotion_cursor", emotion_cursor_},
                      {"stopper", stopper_.to_json()},
                      {"history", history}};
  io::write_file_atomically(dir / "state.json", state.dump(1));
}

void TrainingSession::load_state(const std::filesystem::path& dir) {
  const json state = json::parse(io::read_file(dir / "state.json"));
  if (state.at("seed").get<std::uint64_t>() != seed_)
    throw std::invalid_argument("training state was written for a different seed");
  model_.load_weights(dir / "model.safetensors");
  adam_.load(dir / "adam.safetensors");
  const io::TensorFile best = io::read_safetensors(dir / "best.safetensors");
  best_weights_.clear();
  if (!best.tensors.empty()) {
    for (const Parameter* p : std::as_const(model_).parameters()) {
      const io::Tensor& t = best.tensors.at(p->name);
      Matrix m(p->value.rows(), p->value.cols());
      std::copy(t.values.begin(), t.values.end(), m.data());
      best_weights_.push_back(std::move(m));
    }
  }
  steps_ = state.at("steps");
  done_ = state.at("done");
  stop_reason_ = state.at("stop_reason");
  shuffle_rng_.deserialize(state.at("shuffle_rng"));
  dropout_rng_.deserialize(state.at("dropout_rng"));
  emotion_order_ = state.at("emotion_order").get<std::vector<std::size_t>>();
  emotion_cursor_ = state.at("emotion_cursor");
  stopper_.restore_json(state.at("stopper"));
  history_.clear();
  for (const auto& h : state.at("history"))
    history_.push_back({h.at("epoch"), h.at("steps"), h.at("train_loss"), h.at("dev_metric"),
                        h.at("improved")});
}

// ---------------------------------------------------------------- procedures

TrainResult train_single_task(const ModelConfig& config, const TransformerEncoder& encoder,
                              Task task, const TrainDevView& data, const TrainOptions& options,
                              std::uint64_t seed) {
  AssembledModel model(config, encoder, HeadSet::for_task(task), seed);
  TrainingSession session(std::move(model),
                          task == Task::Stress ? Procedure::SingleStress : Procedure::SingleEmotion,
                          data, nullptr, options, seed);
  return session.run();
}

FineTuneResult train_fine_tune(const ModelConfig& config, const TransformerEncoder& encoder,
                               const TrainDevView& emotion, const TrainDevView& stress,
                               const TrainOptions& options, std::uint64_t seed) {
  TrainResult stage1 = train_single_task(config, encoder, Task::Emotion, emotion, options, seed);
  const EncoderCheckpoint transfer = stage1.model.encoder().export_weights();

  TransformerEncoder stage2_encoder = encoder;
  stage2_encoder.import_weights(transfer);
  AssembledModel stage2(config, std::move(stage2_encoder), HeadSet::for_task(Task::Stress), seed);
  const std::string initial = stage2.encoder().fingerprint();
  if (initial != transfer.fingerprint)
    throw TrainingError("encoder transfer fingerprint mismatch: " + initial + " vs " +
                        transfer.fingerprint);
  TrainingSession session(std::move(stage2), Procedure::SingleStress, stress, nullptr, options, seed);
  TrainResult stage2_result = session.run();
  return FineTuneResult{std::move(stage1), std::move(stage2_result), transfer.fingerprint, initial};
}

TrainResult train_alternating(const ModelConfig& config, const TransformerEncoder& encoder,
                              const TrainDevView& emotion, const TrainDevView& stress,
                              const TrainOptions& options, std::uint64_t seed) {
  AssembledModel model(config, encoder, HeadSet::both(), seed);
  TrainingSession session(std::move(model), Procedure::Alternating, stress, &emotion, options, seed);
  return session.run();
}

std::vector<TextExample> pseudo_label_emotions(const AssembledModel& labeler,
                                               std::span<const TextExample> examples,
                                               double threshold) {
  if (!labeler.frozen()) throw std::logic_error("pseudo-labeling needs a frozen emotion model");
  const auto predicted = predict_emotions(labeler, examples, threshold);
  std::vector<TextExample> out(examples.begin(), examples.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].emotions = predicted[i];
    out[i].emotion_is_pseudo = true;
  }
  return out;
}

TrainResult train_joint(const ModelConfig& config, const TransformerEncoder& encoder,
                        const TrainDevView& labeled_stress, const TrainOptions& options,
                        std::uint64_t seed) {
  AssembledModel model(config, encoder, HeadSet::both(), seed);
  TrainingSession session(std::move(model), Procedure::Joint, labeled_stress, nullptr, options, seed);
  return session.run();
}

AssembledModel train_emotion_labeler(const ModelConfig& config, const TransformerEncoder& encoder,
                                     const TrainDevView& emotion, const TrainOptions& options,
                                     std::uint64_t seed, double* dev_macro_f1) {
  ModelConfig labeler_config = config;
  labeler_config.architecture = Architecture::SingleTask;
  labeler_config.lambda.reset();
  TrainResult r = train_single_task(labeler_config, encoder, Task::Emotion, emotion, options, seed);
  if (dev_macro_f1) *dev_macro_f1 = r.best_dev;
  r.model.freeze();
  return std::move(r.model);
}

ArchitectureRun train_architecture(const ModelConfig& config, const TransformerEncoder& encoder,
                                   const ArchitectureData& data, const TrainOptions& options,
                                   std::uint64_t seed, const AssembledModel* labeler) {
  config.validate();
  auto need_emotion = [&]() -> const TrainDevView& {
    if (!data.emotion) throw TrainingError(std::string(display_name(config.architecture)) +
                                           " needs the emotion corpus");
    return *data.emotion;
  };
  switch (config.architecture) {
    case Architecture::SingleTask:
      return {train_single_task(config, encoder, Task::Stress, data.stress, options, seed), {}, {}};
    case Architecture::FineTune: {
      FineTuneResult ft = train_fine_tune(config, encoder, need_emotion(), data.stress, options, seed);
      TrainResult stress = ft.stress_stage;
      return {std::move(stress), std::move(ft), {}};
    }
    case Architecture::MultiAlt:
      return {train_alternating(config, encoder, need_emotion(), data.stress, options, seed), {}, {}};
    case Architecture::Multi: {
      std::optional<AssembledModel> own;
      std::optional<double> labeler_f1;
      if (labeler == nullptr) {
        double f1 = 0.0;
        TrainOptions labeler_options = options;
        labeler_options.on_step = nullptr;
        own.emplace(train_emotion_labeler(config, encoder, need_emotion(), labeler_options, seed, &f1));
        labeler = &*own;
        labeler_f1 = f1;
      }
      if (labeler->encoder().identity().name != config.encoder.name)
        spdlog::warn("pseudo-labels come from a {} labeler for a {} cell",
                     to_string(labeler->encoder().identity().name), to_string(config.encoder.name));
      TrainDevView labeled{data.stress.name + "+pseudo",
                           pseudo_label_emotions(*labeler, data.stress.train,
                                                 options.pseudo_label_threshold),
                           data.stress.dev};
      if (options.access_log)
        options.access_log->record({"label", data.stress.name, "train",
                                    dataset_fingerprint(data.stress.train), data.stress.train.size()});
      return {train_joint(config, encoder, labeled, options, seed), {}, labeler_f1};
    }
  }
  throw std::invalid_argument("bad architecture");
}

// ---------------------------------------------------------------- seeds

SeedSet SeedSet::from(std::span<const std::uint64_t> seeds) {
  if (seeds.size() != 3)
    throw std::invalid_argument("reported results need exactly 3 seeds, got " +
                                std::to_string(seeds.size()));
  SeedSet s;
  std::copy(seeds.begin(), seeds.end(), s.seeds.begin());
  return s;
}

SeededResult run_seeded(const std::function<std::vector<MetricReport>(std::uint64_t)>& fn,
                        const SeedSet& seeds) {
  SeededResult out;
  for (std::uint64_t seed : seeds.seeds) {
    RunResult r;
    r.seed = seed;
    try {
      r.reports = fn(seed);
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
      out.failed = true;
      spdlog::error("seed {} failed: {}", seed, e.what());
    }
    out.runs.push_back(std::move(r));
  }
  if (out.failed) return out;
  const std::size_t sets = out.runs.front().reports.size();
  for (const auto& r : out.runs)
    if (r.reports.size() != sets) throw std::logic_error("seed runs returned different report sets");
  for (std::size_t k = 0; k < sets; ++k) {
    std::vector<MetricReport> column;
    for (const auto& r : out.runs) column.push_back(r.reports[k]);
    out.mean.push_back(MetricReport::mean(column));
  }
  return out;
}

// ---------------------------------------------------------------- evaluation

MetricReport evaluate_stress_model(const AssembledModel& model,
                                   std::span<const TextExample> examples,
                                   const std::string& eval_set, std::size_t batch_size) {
  const auto gold = stress_labels(examples, "evaluation");
  const auto pred = predict_stress(model, examples, batch_size);
  return evaluate_binary(pred.labels, gold, eval_set);
}

MetricReport evaluate_emotion_model(const AssembledModel& model,
                                    std::span<const TextExample> examples,
                                    const std::string& eval_set, std::size_t batch_size) {
  const auto gold = emotion_labels(examples, "evaluation");
  const auto pred = predict_emotions(model, examples, 0.5, batch_size);
  MetricReport r;
  r.eval_set = eval_set;
  r.n = examples.size();
  r.macro_f1 = macro_f1(pred, gold).value;
  r.f1 = *r.macro_f1;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) exact += pred[i] == gold[i];
  r.accuracy = examples.empty() ? 0.0 : 100.0 * static_cast<double>(exact) / examples.size();
  return r;
}

}  // namespace emostress
