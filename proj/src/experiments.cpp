// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/core/hash.hpp"
#include "emostress/plot.hpp"
#include "emostress/tuner.hpp"

namespace emostress {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kMinorityTest = "minority-test";
constexpr const char* kStressTest = "stress-test";
constexpr const char* kMinorityDev = "minority-dev";

std::string fraction_label(double f) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", f);
  return buf;
}

json access_json(const DataAccessLog& log) {
  json out = json::array();
  for (const auto& e : log.entries())
    out.push_back({{"phase", e.phase},
                   {"dataset", e.dataset},
                   {"partition", e.partition},
                   {"fingerprint", e.fingerprint},
                   {"count", e.count}});
  return out;
}

json split_fingerprints(const DatasetSplit& s) {
  return {{"train", dataset_fingerprint(s.train)},
          {"dev", dataset_fingerprint(s.dev)},
          {"test", dataset_fingerprint(s.test)}};
}

/// Settings that change training outcomes; part of every cache key.
json training_key(const RunConfig& c) {
  return {{"batch_size", c.training.batch_size},
          {"eval_batch_size", c.training.eval_batch_size},
          {"max_epochs", c.training.policy.max_epochs},
          {"patience", c.training.policy.patience},
          {"tolerance", c.training.policy.tolerance},
          {"max_steps", c.training.max_steps ? json(*c.training.max_steps) : json(nullptr)},
          {"max_length", c.max_length},
          {"tiny_seed", c.tiny_seed}};
}

json history_json(const TrainResult& r) {
  json h = json::array();
  for (const auto& e : r.history)
    h.push_back({{"epoch", e.epoch},
                 {"steps", e.steps},
                 {"train_loss", e.train_loss},
                 {"dev_metric", e.dev_metric},
                 {"improved", e.improved}});
  return h;
}

/// A study's evaluation sets, by name.
struct EvalSet {
  std::string name;
  const std::vector<TextExample>* examples;
  std::string dataset;
  std::string partition;
};

/// Trains one frozen emotion labeler per encoder and shares it across the
/// cells of a study. Labelers are cached on disk under the study directory.
class LabelerPool {
 public:
  LabelerPool(const RunConfig& config, const PreparedCorpora& data, EncoderPool& encoders, fs::path dir)
      : config_(config), data_(data), encoders_(encoders), dir_(std::move(dir)) {}

  struct Entry {
    std::shared_ptr<const AssembledModel> model;
    double dev_macro_f1 = 0.0;
    std::string key;
  };

  Entry get(EncoderName name) {
    std::unique_lock lock(mutex_);
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    auto encoder = encoders_.get(name);
    const ModelConfig mc = config_.labeler_model(name);
    const std::uint64_t seed = config_.seeds.seeds[0];
    const json key_doc = {{"model", json::parse(mc.to_json())},
                          {"emotion", split_fingerprints(data_.emotion)},
                          {"training", training_key(config_)},
                          {"seed", seed}};
    const std::string key = sha256_hex(key_doc.dump());
    const fs::path path = dir_ / (std::string(to_string(name)) + ".safetensors");

    Entry entry;
    entry.key = key;
    if (fs::exists(path)) {
      const json manifest = json::parse(AssembledModel::read_manifest(path));
      if (manifest.value("key", std::string{}) == key) {
        AssembledModel m(mc, *encoder, HeadSet::for_task(Task::Emotion), seed);
        m.load_weights(path);
        m.freeze();
        entry.model = std::make_shared<const AssembledModel>(std::move(m));
        entry.dev_macro_f1 = manifest.value("dev_macro_f1", 0.0);
        spdlog::info("reusing the {} emotion labeler", to_string(name));
      }
    }
    if (!entry.model) {
      spdlog::info("training the {} emotion labeler", to_string(name));
      const TrainDevView view{"emotion", data_.emotion.train, data_.emotion.dev};
      double f1 = 0.0;
      AssembledModel m = train_emotion_labeler(mc, *encoder, view, config_.train_options(), seed, &f1);
      fs::create_directories(dir_);
      m.save(path, json({{"key", key}, {"dev_macro_f1", f1}}).dump());
      entry.dev_macro_f1 = f1;
      entry.model = std::make_shared<const AssembledModel>(std::move(m));
    }
    cache_[name] = entry;
    return entry;
  }

 private:
  const RunConfig& config_;
  const PreparedCorpora& data_;
  EncoderPool& encoders_;
  fs::path dir_;
  std::mutex mutex_;  // held while training, so each labeler is built once
  std::map<EncoderName, Entry> cache_;
};

struct StudyContext {
  std::string study;
  const RunConfig& config;
  const PreparedCorpora& data;
  EncoderPool& encoders;
  LabelerPool& labelers;
  ResultsStore& store;
  bool reuse;
};

json cell_json(const CellSpec& s) {
  json j = {{"architecture", display_name(s.architecture)}, {"encoder", display_name(s.encoder)}};
  if (s.fraction) j["fraction"] = *s.fraction;
  return j;
}

/// Tunes (or takes defaults), then trains and evaluates every seed.
CellOutcome run_cell(const StudyContext& ctx, const CellSpec& spec, DevChoice dev,
                     const std::vector<TextExample>& stress_train, const std::vector<EvalSet>& evals) {
  CellOutcome out;
  out.spec = spec;
  const std::string cell = spec.id();
  try {
    auto encoder = ctx.encoders.get(spec.encoder);
    const ArchitectureData arch_data = architecture_data(ctx.data, dev, stress_train);
    std::optional<LabelerPool::Entry> labeler;
    if (spec.architecture == Architecture::Multi) labeler = ctx.labelers.get(spec.encoder);
    const AssembledModel* labeler_model = labeler ? labeler->model.get() : nullptr;

    const json data_doc = {{"stress_train", dataset_fingerprint(arch_data.stress.train)},
                           {"dev", dataset_fingerprint(arch_data.stress.dev)},
                           {"emotion", split_fingerprints(ctx.data.emotion)},
                           {"labeler", labeler ? json(labeler->key) : json(nullptr)}};

    ModelConfig model = ctx.config.default_model(spec.architecture, spec.encoder);
    if (ctx.config.tune) {
      const fs::path tuning_dir = ctx.store.dir() / "tuning";
      fs::create_directories(tuning_dir);
      const json tune_key_doc = {{"base", json::parse(model.to_json())},
                                 {"data", data_doc},
                                 {"training", training_key(ctx.config)},
                                 {"budget", ctx.config.tuner.budget},
                                 {"strategy", to_string(ctx.config.tuner.strategy)},
                                 {"seed", ctx.config.tuner.seed},
                                 {"initial_random", ctx.config.tuner.initial_random},
                                 {"candidates", ctx.config.tuner.candidates}};
      const std::string tune_key = sha256_hex(tune_key_doc.dump());
      const fs::path best_path = tuning_dir / (cell + ".best.json");
      bool reused = false;
      if (ctx.reuse && fs::exists(best_path)) {
        const json best = json::parse(io::read_file(best_path));
        if (best.value("key", std::string{}) == tune_key) {
          model = ModelConfig::from_json(best.at("config").dump());
          reused = true;
        }
      }
      if (!reused) {
        TunerOptions topts = ctx.config.tuner;
        topts.log_path = tuning_dir / (cell + ".trials.jsonl");
        fs::remove(*topts.log_path);
        DataAccessLog access;
        TrainOptions train = ctx.config.train_options();
        train.access_log = &access;
        const auto result = tune(model, make_training_objective(*encoder, arch_data, train,
                                                                ctx.config.seeds.seeds[0], labeler_model),
                                 topts);
        if (!access.leaks().empty()) throw std::logic_error("tuning read a test partition");
        model = result.best;
        io::write_file_atomically(best_path, json({{"key", tune_key},
                                                   {"config", json::parse(model.to_json())},
                                                   {"criterion", result.best_trial.criterion},
                                                   {"trials", result.trials.size()}})
                                                 .dump(2));
      }
    }
    out.tuned = model;

    const std::string model_json = model.to_json();
    out.seeded = run_seeded(
        [&](std::uint64_t seed) {
          const json key_doc = {{"study", ctx.study}, {"cell", cell},  {"model", json::parse(model_json)},
                                {"data", data_doc},   {"seed", seed},  {"training", training_key(ctx.config)}};
          const std::string key = sha256_hex(key_doc.dump());
          std::vector<MetricReport> reports;
          if (ctx.reuse) {
            if (auto cached = ctx.store.cached_manifest(cell, seed, key)) {
              const json manifest = json::parse(*cached);
              for (const auto& r : manifest.at("reports")) reports.push_back(MetricReport::from_json(r.dump()));
              return reports;
            }
          }
          const auto start = std::chrono::steady_clock::now();
          DataAccessLog access;
          TrainOptions train = ctx.config.train_options();
          train.access_log = &access;
          const ArchitectureRun run = train_architecture(model, *encoder, arch_data, train, seed, labeler_model);
          if (!access.leaks().empty()) throw std::logic_error("training read a test partition");
          for (const auto& e : evals) {
            access.record({"evaluate", e.dataset, e.partition, dataset_fingerprint(*e.examples), e.examples->size()});
            reports.push_back(evaluate_stress_model(run.result.model, *e.examples, e.name,
                                                    ctx.config.training.eval_batch_size));
          }
          json reps = json::array();
          for (const auto& r : reports) reps.push_back(json::parse(r.to_json()));
          json manifest = {
              {"key", key},
              {"study", ctx.study},
              {"cell", cell_json(spec)},
              {"seed", seed},
              {"model", json::parse(model_json)},
              {"data", data_doc},
              {"eval_sets", [&] {
                 json j = json::object();
                 for (const auto& e : evals) j[e.name] = dataset_fingerprint(*e.examples);
                 return j;
               }()},
              {"history", history_json(run.result)},
              {"best_epoch", run.result.best_epoch},
              {"best_dev", run.result.best_dev},
              {"steps", run.result.steps},
              {"stop_reason", run.result.stop_reason},
              {"labeler_dev_macro_f1", labeler ? json(labeler->dev_macro_f1) : json(nullptr)},
              {"model_fingerprint", run.result.model.fingerprint()},
              {"reports", reps},
              {"access_log", access_json(access)},
              {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
              {"config", json::parse(ctx.config.to_json())}};
          ctx.store.write_manifest(cell, seed, manifest.dump(2));
          return reports;
        },
        ctx.config.seeds);
    out.ok = !out.seeded.failed;
    if (!out.ok)
      for (const auto& r : out.seeded.runs)
        if (!r.ok) {
          out.error = "seed " + std::to_string(r.seed) + ": " + r.error;
          break;
        }
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }

  for (const auto& r : out.seeded.runs)
    for (const auto& rep : r.reports) {
      json line = {{"kind", "run"}, {"study", ctx.study}, {"cell", cell}, {"seed", r.seed}};
      line.update(cell_json(spec));
      line.update(json::parse(rep.to_json()));
      ctx.store.append(line.dump());
    }
  if (out.ok) {
    for (const auto& rep : out.seeded.mean) {
      json line = {{"kind", "mean"}, {"study", ctx.study}, {"cell", cell}};
      line.update(cell_json(spec));
      if (out.tuned) line["model"] = json::parse(out.tuned->to_json());
      line.update(json::parse(rep.to_json()));
      ctx.store.append(line.dump());
    }
    spdlog::info("cell {} done", cell);
  } else {
    json line = {{"kind", "cell_failed"}, {"study", ctx.study}, {"cell", cell}, {"error", out.error}};
    line.update(cell_json(spec));
    ctx.store.append(line.dump());
    spdlog::error("cell {} failed: {}", cell, out.error);
  }
  return out;
}

/// Runs `cells` on up to `jobs` worker threads; results keep input order.
std::vector<CellOutcome> run_queue(std::size_t jobs, std::size_t n,
                                   const std::function<CellOutcome(std::size_t)>& work) {
  std::vector<CellOutcome> out(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) out[i] = work(i);
      });
  }
  return out;
}

std::vector<std::string> arch_rows(std::span<const Architecture> archs) {
  std::vector<std::string> rows;
  for (auto a : archs) rows.emplace_back(display_name(a));
  return rows;
}

std::vector<std::string> encoder_cols(const std::vector<EncoderName>& encs) {
  std::vector<std::string> cols;
  for (auto e : encs) cols.emplace_back(display_name(e));
  return cols;
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_atomically(path, text); }

}  // namespace

// ---------------------------------------------------------------------------

PreparedCorpora PreparedCorpora::load(const RunConfig& config) {
  std::optional<EmotionTaxonomy> custom;
  if (config.taxonomy) custom = EmotionTaxonomy::load(config.resolve(*config.taxonomy));
  const EmotionTaxonomy& taxonomy = custom ? *custom : EmotionTaxonomy::builtin();

  PreparedCorpora out;
  auto prepare = [&](const CorpusConfig& cc, Source source, const std::string& name) {
    LoadReport report = load_corpus(config.resolve(cc.path), source, cc.schema, taxonomy);
    out.rejected_rows[name] = report.rejected.size();
    for (const auto& r : report.rejected)
      spdlog::warn("{}: record {} (line {}) rejected: {}", name, r.record, r.line, r.message);
    if (cc.split.total() != report.examples.size())
      throw ConfigError("corpora." + name + ".split: counts sum to " + std::to_string(cc.split.total()) +
                        " but " + std::to_string(report.examples.size()) + " examples were loaded");
    return split_dataset(report.examples, cc.split, config.split_seed, name);
  };
  out.stress = prepare(config.stress, Source::StressCorpus, "stress");
  out.minority = prepare(config.minority, Source::MinorityCorpus, "minority");
  out.emotion = prepare(config.emotion, Source::EmotionCorpus, "emotion");
  return out;
}

void PreparedCorpora::write(const fs::path& dir) const {
  fs::create_directories(dir);
  json index = json::object();
  for (const DatasetSplit* s : {&stress, &minority, &emotion}) {
    write_canonical(dir / (s->name + ".train.jsonl"), s->train);
    write_canonical(dir / (s->name + ".dev.jsonl"), s->dev);
    write_canonical(dir / (s->name + ".test.jsonl"), s->test);
    index[s->name] = split_fingerprints(*s);
    index[s->name]["seed"] = s->seed;
  }
  io::write_file_atomically(dir / "index.json", index.dump(2));
}

PreparedCorpora PreparedCorpora::read(const fs::path& dir) {
  const json index = json::parse(io::read_file(dir / "index.json"));
  PreparedCorpora out;
  for (DatasetSplit* s : {&out.stress, &out.minority, &out.emotion}) {
    s->name = s == &out.stress ? "stress" : s == &out.minority ? "minority" : "emotion";
    s->train = read_canonical(dir / (s->name + ".train.jsonl"));
    s->dev = read_canonical(dir / (s->name + ".dev.jsonl"));
    s->test = read_canonical(dir / (s->name + ".test.jsonl"));
    s->seed = index.at(s->name).at("seed");
  }
  return out;
}

std::string_view to_string(DevChoice d) { return d == DevChoice::Minority ? "mstress" : "dreaddit"; }

DevChoice dev_choice_from_string(std::string_view s) {
  if (s == "mstress" || s == "minority") return DevChoice::Minority;
  if (s == "dreaddit" || s == "stress") return DevChoice::Stress;
  throw std::invalid_argument("unknown dev set '" + std::string(s) + "'");
}

ArchitectureData architecture_data(const PreparedCorpora& data, DevChoice dev,
                                   std::span<const TextExample> stress_train) {
  const auto& dev_set = dev == DevChoice::Minority ? data.minority.dev : data.stress.dev;
  TrainDevView stress{dev == DevChoice::Minority ? "stress+minority-dev" : "stress",
                      {stress_train.begin(), stress_train.end()},
                      dev_set};
  return {std::move(stress), TrainDevView{"emotion", data.emotion.train, data.emotion.dev}};
}

std::shared_ptr<const TransformerEncoder> EncoderPool::get(EncoderName name) {
  std::lock_guard lock(mutex_);
  if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
  if (auto it = failed_.find(name); it != failed_.end()) throw std::runtime_error(it->second);
  try {
    auto enc = std::make_shared<const TransformerEncoder>(
        make_encoder(config_.identity(name), config_.max_length, config_.asset_cache_dir(), config_.tiny_seed));
    loaded_[name] = enc;
    return enc;
  } catch (const std::exception& e) {
    failed_[name] = std::string("encoder ") + std::string(to_string(name)) + " unavailable: " + e.what();
    throw std::runtime_error(failed_[name]);
  }
}

ResultsStore::ResultsStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  log_ = std::make_unique<io::AppendLog>(dir_ / "results.jsonl");
}

void ResultsStore::append(const std::string& json_line) { log_->append(json_line); }

fs::path ResultsStore::manifest_path(const std::string& cell, std::uint64_t seed) const {
  return dir_ / "runs" / cell / ("seed-" + std::to_string(seed)) / "manifest.json";
}

void ResultsStore::write_manifest(const std::string& cell, std::uint64_t seed, const std::string& text) const {
  const auto path = manifest_path(cell, seed);
  fs::create_directories(path.parent_path());
  io::write_file_atomically(path, text);
}

std::optional<std::string> ResultsStore::cached_manifest(const std::string& cell, std::uint64_t seed,
                                                         const std::string& key) const {
  const auto path = manifest_path(cell, seed);
  if (!fs::exists(path)) return std::nullopt;
  try {
    std::string text = io::read_file(path);
    if (json::parse(text).value("key", std::string{}) == key) return text;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable manifest {}: {}", path.string(), e.what());
  }
  return std::nullopt;
}

std::string CellSpec::id() const {
  std::string s = std::string(to_string(architecture)) + "__" + std::string(to_string(encoder));
  if (fraction) s += "__f" + fraction_label(*fraction);
  return s;
}

double l1_distance(const std::array<double, kEmotionCount>& a, const std::array<double, kEmotionCount>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kEmotionCount; ++i) d += std::abs(a[i] - b[i]);
  return d;
}

EmotionDistribution emotion_distribution(std::string corpus, std::optional<StressLabel> status,
                                         std::span<const TextExample> labeled) {
  EmotionDistribution d;
  d.corpus = std::move(corpus);
  d.status = status;
  std::array<std::size_t, kEmotionCount> counts{};
  for (const auto& ex : labeled) {
    if (status && ex.stress != status) continue;
    if (!ex.emotions) throw std::invalid_argument("example " + ex.id + " has no emotion vector");
    ++d.n;
    for (std::size_t k = 0; k < kEmotionCount; ++k) counts[k] += ex.emotions->test(k);
  }
  for (std::size_t k = 0; k < kEmotionCount; ++k)
    d.proportions[k] = d.n ? static_cast<double>(counts[k]) / static_cast<double>(d.n) : 0.0;
  return d;
}

// ---------------------------------------------------------------------------

PrimaryReport primary_matrix(const RunConfig& config, const PreparedCorpora& data, const StudyOptions& options) {
  const auto encs = config.encoder_names();
  ResultsStore store(options.out_dir);
  EncoderPool encoders(config);
  LabelerPool labelers(config, data, encoders, options.out_dir / "labelers");
  const StudyContext ctx{"primary", config, data, encoders, labelers, store, options.reuse_manifests};
  const std::vector<EvalSet> evals = {{kMinorityTest, &data.minority.test, "minority", "test"},
                                      {kStressTest, &data.stress.test, "stress", "test"},
                                      {kMinorityDev, &data.minority.dev, "minority", "dev"}};

  std::vector<CellSpec> cells;
  for (auto a : config.architectures)
    for (auto e : encs) cells.push_back({a, e, std::nullopt});
  PrimaryReport report{ResultsGrid("Minority stress (test)", arch_rows(config.architectures), encoder_cols(encs)),
                       ResultsGrid("Psychological stress (test)", arch_rows(config.architectures), encoder_cols(encs)),
                       ResultsGrid("Minority stress (dev)", arch_rows(config.architectures), encoder_cols(encs)),
                       {}};
  report.minority_test.set_reference("Prior best", kPriorMinorityF1);
  report.cells = run_queue(config.jobs, cells.size(), [&](std::size_t i) {
    return run_cell(ctx, cells[i], DevChoice::Minority, data.stress.train, evals);
  });

  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    const std::string row(display_name(c.spec.architecture)), col(display_name(c.spec.encoder));
    for (const auto& m : c.seeded.mean) {
      if (m.eval_set == kMinorityTest) report.minority_test.set(row, col, m);
      if (m.eval_set == kStressTest) report.stress_test.set(row, col, m);
      if (m.eval_set == kMinorityDev) report.minority_dev.set(row, col, m);
    }
  }
  write_text(options.out_dir / "minority_test.md", report.minority_test.render_text());
  write_text(options.out_dir / "stress_test.md", report.stress_test.render_text());
  write_text(options.out_dir / "minority_dev.md", report.minority_dev.render_text());
  write_text(options.out_dir / "grids.jsonl", report.minority_test.render_jsonl() +
                                                  report.stress_test.render_jsonl() +
                                                  report.minority_dev.render_jsonl());
  std::string failures;
  for (const auto& c : report.cells)
    if (!c.ok) failures += c.spec.id() + "\t" + c.error + "\n";
  write_text(options.out_dir / "failed_cells.tsv", failures);
  return report;
}

ReductionReport data_reduction_study(const RunConfig& config, const PreparedCorpora& data,
                                     const StudyOptions& options) {
  const auto encs = config.encoder_names();
  ResultsStore store(options.out_dir);
  EncoderPool encoders(config);
  LabelerPool labelers(config, data, encoders, options.out_dir / "labelers");
  const StudyContext ctx{"reduction", config, data, encoders, labelers, store, options.reuse_manifests};
  const std::vector<EvalSet> evals = {{kStressTest, &data.stress.test, "stress", "test"}};

  std::map<double, std::vector<TextExample>> reduced;
  for (double f : config.reduction_fractions)
    reduced[f] = reduce_training_set(data.stress, ReductionPlan::for_fraction(f, data.stress.train.size(),
                                                                               config.reduction_seed))
                     .train;

  std::vector<CellSpec> cells;
  for (auto a : {Architecture::SingleTask, Architecture::Multi})
    for (auto e : encs)
      for (double f : config.reduction_fractions) cells.push_back({a, e, f});

  ReductionReport report;
  report.cells = run_queue(config.jobs, cells.size(), [&](std::size_t i) {
    return run_cell(ctx, cells[i], DevChoice::Stress, reduced.at(*cells[i].fraction), evals);
  });

  std::string tsv = "architecture\tencoder\tfraction\ttrain_size\tf1\taccuracy\n";
  std::map<std::pair<Architecture, EncoderName>, plot::Series> curves;
  for (const auto& c : report.cells) {
    ReductionPoint p{c.spec.architecture, c.spec.encoder, *c.spec.fraction, reduced.at(*c.spec.fraction).size(), {}};
    if (c.ok && !c.seeded.mean.empty()) p.mean = c.seeded.mean.front();
    tsv += std::string(display_name(p.architecture)) + "\t" + std::string(display_name(p.encoder)) + "\t" +
           fraction_label(p.fraction) + "\t" + std::to_string(p.train_size) + "\t" +
           (p.mean ? format_percent(p.mean->f1) : "-") + "\t" + (p.mean ? format_percent(p.mean->accuracy) : "-") +
           "\n";
    if (p.mean) {
      auto& s = curves[{p.architecture, p.encoder}];
      s.name = std::string(display_name(p.architecture)) + " / " + std::string(display_name(p.encoder));
      s.dashed = p.architecture == Architecture::SingleTask;
      s.points.emplace_back(100.0 * p.fraction, p.mean->f1);
    }
    report.points.push_back(p);
  }
  std::vector<plot::Series> series;
  for (auto& [k, s] : curves) {
    std::sort(s.points.begin(), s.points.end());
    series.push_back(s);
  }
  write_text(options.out_dir / "reduction.tsv", tsv);
  write_text(options.out_dir / "reduction.svg",
             plot::line_chart("Stress test F1 by training-set size", "% of training set", "F1", series));
  return report;
}

DistributionReport emotion_distribution_study(const RunConfig& config, const PreparedCorpora& data,
                                              const StudyOptions& options) {
  fs::create_directories(options.out_dir);
  EncoderPool encoders(config);
  LabelerPool labelers(config, data, encoders, options.out_dir / "labelers");
  DistributionReport report;
  report.labeler_encoder = config.labeler.encoder.value_or(config.encoder_names().front());
  const auto labeler = labelers.get(report.labeler_encoder);

  DataAccessLog access;
  access.record({"evaluate", "emotion", "test", dataset_fingerprint(data.emotion.test), data.emotion.test.size()});
  report.labeler_macro_f1 =
      evaluate_emotion_model(*labeler.model, data.emotion.test, "emotion-test", config.training.eval_batch_size).f1;

  auto whole = [](const DatasetSplit& s) {
    std::vector<TextExample> all = s.train;
    all.insert(all.end(), s.dev.begin(), s.dev.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    return all;
  };
  std::map<std::string, std::vector<TextExample>> labeled;
  for (const DatasetSplit* s : {&data.minority, &data.stress}) {
    const auto all = whole(*s);
    access.record({"analyze", s->name, "all", dataset_fingerprint(all), all.size()});
    labeled[s->name] = pseudo_label_emotions(*labeler.model, all);
  }
  for (const std::string corpus : {"minority", "stress"}) {
    report.groups.push_back(emotion_distribution(corpus, std::nullopt, labeled[corpus]));
    report.groups.push_back(emotion_distribution(corpus, StressLabel::Stressed, labeled[corpus]));
    report.groups.push_back(emotion_distribution(corpus, StressLabel::NotStressed, labeled[corpus]));
  }
  report.cross_corpus_l1 = l1_distance(report.groups[0].proportions, report.groups[3].proportions);
  report.within_corpus_l1["minority"] = l1_distance(report.groups[1].proportions, report.groups[2].proportions);
  report.within_corpus_l1["stress"] = l1_distance(report.groups[4].proportions, report.groups[5].proportions);
  report.ordering_holds = std::all_of(report.within_corpus_l1.begin(), report.within_corpus_l1.end(),
                                      [&](const auto& kv) { return report.cross_corpus_l1 > kv.second; });

  auto status_name = [](const std::optional<StressLabel>& s) -> std::string {
    if (!s) return "all";
    return *s == StressLabel::Stressed ? "stressed" : "not_stressed";
  };
  std::string tsv = "corpus\tstatus\tn";
  for (auto name : kEmotionNames) tsv += "\t" + std::string(name);
  tsv += "\n";
  std::vector<plot::BarGroup> bars;
  for (const auto& g : report.groups) {
    tsv += g.corpus + "\t" + status_name(g.status) + "\t" + std::to_string(g.n);
    char buf[32];
    for (double p : g.proportions) {
      std::snprintf(buf, sizeof buf, "\t%.4f", p);
      tsv += buf;
    }
    tsv += "\n";
    if (g.status) bars.push_back({g.corpus + " / " + status_name(g.status), {g.proportions.begin(), g.proportions.end()}});
  }
  std::vector<std::string> labels(kEmotionNames.begin(), kEmotionNames.end());
  write_text(options.out_dir / "distribution.tsv", tsv);
  write_text(options.out_dir / "distribution.svg",
             plot::grouped_bar_chart("Predicted emotion distribution", labels, bars));
  const json summary = {{"labeler_encoder", to_string(report.labeler_encoder)},
                        {"labeler_dev_macro_f1", labeler.dev_macro_f1},
                        {"labeler_test_macro_f1", report.labeler_macro_f1},
                        {"cross_corpus_l1", report.cross_corpus_l1},
                        {"within_corpus_l1", report.within_corpus_l1},
                        {"ordering_holds", report.ordering_holds},
                        {"data", {{"minority", split_fingerprints(data.minority)},
                                  {"stress", split_fingerprints(data.stress)},
                                  {"emotion", split_fingerprints(data.emotion)}}},
                        {"access_log", access_json(access)},
                        {"config", json::parse(config.to_json())}};
  write_text(options.out_dir / "summary.json", summary.dump(2));
  return report;
}

std::vector<std::string> plan_study(const RunConfig& config, std::string_view study) {
  std::vector<std::string> lines;
  const auto encs = config.encoder_names();
  const std::size_t seeds = config.seeds.seeds.size();
  const std::string tuning = config.tune ? "tune " + std::to_string(config.tuner.budget) + " trials (" +
                                               std::string(to_string(config.tuner.strategy)) + ") then "
                                         : "defaults, ";
  auto cell_line = [&](const CellSpec& s, std::string_view dev, std::string_view evals) {
    return s.id() + ": " + tuning + "train " + std::to_string(seeds) + " seeds, early-stop on " +
           std::string(dev) + " dev, evaluate " + std::string(evals);
  };
  if (study == "primary") {
    for (auto e : encs)
      if (std::find(config.architectures.begin(), config.architectures.end(), Architecture::Multi) !=
          config.architectures.end())
        lines.push_back("labeler " + std::string(to_string(e)) + ": train on emotion train, early-stop on emotion dev");
    for (auto a : config.architectures)
      for (auto e : encs) lines.push_back(cell_line({a, e, std::nullopt}, "minority", "minority test, stress test, minority dev"));
  } else if (study == "reduction") {
    for (auto e : encs) lines.push_back("labeler " + std::string(to_string(e)) + ": train on emotion train, early-stop on emotion dev");
    for (auto a : {Architecture::SingleTask, Architecture::Multi})
      for (auto e : encs)
        for (double f : config.reduction_fractions) lines.push_back(cell_line({a, e, f}, "stress", "stress test"));
  } else if (study == "emotions") {
    const auto e = config.labeler.encoder.value_or(encs.front());
    lines.push_back("labeler " + std::string(to_string(e)) + ": train on emotion train, evaluate macro F1 on emotion test");
    lines.push_back("pseudo-label minority and stress corpora, group by corpus and stress status, compare L1 distances");
  } else {
    throw std::invalid_argument("unknown study '" + std::string(study) + "'");
  }
  return lines;
}

PrimaryReport load_primary_report(const fs::path& dir) {
  const fs::path path = dir / "results.jsonl";
  if (!fs::exists(path)) throw std::runtime_error("no results records in " + dir.string());
  std::ifstream in(path);
  std::vector<std::string> rows, cols;
  std::map<std::tuple<std::string, std::string, std::string>, MetricReport> latest;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("kind", std::string{}) != "mean" || j.value("study", std::string{}) != "primary") continue;
    const std::string row = j.at("architecture"), col = j.at("encoder");
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
    latest[{row, col, j.at("eval_set")}] = MetricReport::from_json(line);
  }
  auto order = [](std::vector<std::string>& v, const std::vector<std::string>& canonical) {
    std::stable_sort(v.begin(), v.end(), [&](const auto& a, const auto& b) {
      auto ia = std::find(canonical.begin(), canonical.end(), a), ib = std::find(canonical.begin(), canonical.end(), b);
      return ia < ib;
    });
  };
  std::vector<std::string> arch_names, enc_names;
  for (auto a : kArchitectures) arch_names.emplace_back(display_name(a));
  for (auto e : kStudyEncoders) enc_names.emplace_back(display_name(e));
  enc_names.emplace_back(display_name(EncoderName::TinyTest));
  order(rows, arch_names);
  order(cols, enc_names);
  PrimaryReport report{ResultsGrid("Minority stress (test)", rows, cols),
                       ResultsGrid("Psychological stress (test)", rows, cols),
                       ResultsGrid("Minority stress (dev)", rows, cols),
                       {}};
  report.minority_test.set_reference("Prior best", kPriorMinorityF1);
  for (const auto& [k, m] : latest) {
    const auto& [row, col, set] = k;
    if (set == kMinorityTest) report.minority_test.set(row, col, m);
    if (set == kStressTest) report.stress_test.set(row, col, m);
    if (set == kMinorityDev) report.minority_dev.set(row, col, m);
  }
  return report;
}

}  // namespace emostress
