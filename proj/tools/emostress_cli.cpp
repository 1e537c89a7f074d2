// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Every subcommand validates its inputs before
// writing anything; --dry-run stops right after validation and prints the
// plan.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/corpus.hpp"
#include "emostress/emotaxonomy.hpp"
#include "emostress/experiments.hpp"
#include "emostress/io/atomic_file.hpp"
#include "emostress/runconfig.hpp"
#include "emostress/trainer.hpp"
#include "emostress/tuner.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace emostress;

namespace {

struct Globals {
  std::string config;
  std::string workspace;
  std::string log_level = "info";
  bool dry_run = false;
};

RunConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  RunConfig c = RunConfig::load(g.config);
  if (!g.workspace.empty()) c.workspace = fs::absolute(g.workspace).lexically_normal();
  return c;
}

fs::path under_workspace(const Globals& g, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || g.workspace.empty()) return p;
  return fs::path(g.workspace) / p;
}

void print_plan(const std::vector<std::string>& lines) {
  std::cout << "plan (" << lines.size() << " steps, nothing written):\n";
  for (const auto& l : lines) std::cout << "  " << l << "\n";
}

ColumnSchema schema_from(const std::string& text_col, const std::string& label_col, const std::string& id_col,
                         const std::string& delimiter, const std::string& label_format) {
  ColumnSchema s;
  s.text_col = text_col;
  s.label_col = label_col;
  if (!id_col.empty()) s.id_col = id_col;
  s.delimiter = delimiter == "tab" || delimiter == "\\t" ? '\t' : delimiter.at(0);
  if (label_format == "indices")
    s.emotion_format = EmotionLabelFormat::Indices;
  else if (label_format == "indicators")
    s.emotion_format = EmotionLabelFormat::Indicators;
  return s;
}

SplitCounts parse_counts(const std::string& text) {
  std::vector<std::size_t> v;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) v.push_back(std::stoul(part));
  if (v.size() != 3) throw std::invalid_argument("--counts expects A,B,C");
  return {v[0], v[1], v[2]};
}

std::string percent(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * share);
  return buf;
}

/// Writes a model checkpoint whose manifest is enough to rebuild it.
void save_model(const AssembledModel& model, const RunConfig& config, const fs::path& path, const json& extra) {
  json manifest = {{"model", json::parse(model.config().to_json())},
                   {"heads", {{"stress", model.heads().stress}, {"emotion", model.heads().emotion}}},
                   {"max_length", config.max_length},
                   {"tiny_seed", config.tiny_seed}};
  manifest.update(extra);
  model.save(path, manifest.dump());
}

AssembledModel load_model(const fs::path& path, const fs::path& asset_cache) {
  const json m = json::parse(AssembledModel::read_manifest(path));
  const ModelConfig mc = ModelConfig::from_json(m.at("model").dump());
  TransformerEncoder enc = make_encoder(mc.encoder, m.value("max_length", std::size_t{512}), asset_cache,
                                        m.value("tiny_seed", TransformerEncoder::kTinyInitSeed));
  const HeadSet heads{m.at("heads").at("stress").get<bool>(), m.at("heads").at("emotion").get<bool>()};
  AssembledModel model(mc, std::move(enc), heads, 0);
  model.load_weights(path);
  model.freeze();
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-infused stress classifiers: data, training, tuning and studies"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run config (JSON)");
  app.add_option("--workspace", g.workspace, "Workspace root; overrides the config's workspace");
  app.add_flag("--dry-run", g.dry_run, "Validate inputs and print the plan without writing anything");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));

  // corpus ------------------------------------------------------------------
  auto* corpus = app.add_subcommand("corpus", "Ingest, split and reduce corpora");
  corpus->require_subcommand(1);
  std::string source, path, text_col = "text", label_col = "label", id_col, delimiter = ",",
                            label_format = "names", out;
  auto* ingest = corpus->add_subcommand("ingest", "Load a delimited file into the canonical format");
  ingest->add_option("--source", source, "stress|minority|emotion")->required()
      ->check(CLI::IsMember({"stress", "minority", "emotion"}));
  ingest->add_option("--path", path, "Input file")->required();
  ingest->add_option("--text-col", text_col);
  ingest->add_option("--label-col", label_col);
  ingest->add_option("--id-col", id_col);
  ingest->add_option("--delimiter", delimiter, "Single character or 'tab'");
  ingest->add_option("--label-format", label_format, "Emotion labels: names|indices|indicators")
      ->check(CLI::IsMember({"names", "indices", "indicators"}));
  ingest->add_option("--out", out, "Canonical output file");

  std::string input, counts, out_dir, name = "dataset";
  std::uint64_t seed = 0;
  double fraction = 1.0;
  auto* split = corpus->add_subcommand("split", "Seeded split by exact counts");
  split->add_option("--input", input, "Canonical input file")->required();
  split->add_option("--counts", counts, "train,dev,test")->required();
  split->add_option("--seed", seed);
  split->add_option("--name", name);
  split->add_option("--out-dir", out_dir)->required();

  auto* reduce = corpus->add_subcommand("reduce", "Stratified subsample of a training file");
  reduce->add_option("--input", input, "Canonical training file")->required();
  reduce->add_option("--fraction", fraction)->required();
  reduce->add_option("--seed", seed);
  reduce->add_option("--out", out)->required();

  // taxonomy ----------------------------------------------------------------
  auto* taxonomy = app.add_subcommand("taxonomy", "Emotion taxonomy tools");
  taxonomy->require_subcommand(1);
  std::string emotion_corpus, mapping;
  auto* validate = taxonomy->add_subcommand("validate", "Count coarse labels over an emotion corpus");
  validate->add_option("--emotion-corpus", emotion_corpus)->required();
  validate->add_option("--mapping", mapping, "fine<TAB>coarse table (default: built in)");
  validate->add_option("--text-col", text_col);
  validate->add_option("--label-col", label_col);
  validate->add_option("--delimiter", delimiter);
  validate->add_option("--label-format", label_format)->check(CLI::IsMember({"names", "indices", "indicators"}));

  // train / tune / evaluate -------------------------------------------------
  std::string arch, encoder, dev = "mstress";
  std::optional<double> lr, dropout, lambda;
  auto* train = app.add_subcommand("train", "Train one architecture for one seed");
  train->add_option("--arch", arch, "single|finetune|multialt|multi")->required();
  train->add_option("--encoder", encoder)->required();
  train->add_option("--seed", seed)->required();
  train->add_option("--dev", dev, "mstress|dreaddit")->check(CLI::IsMember({"mstress", "dreaddit"}));
  train->add_option("--lr", lr);
  train->add_option("--dropout", dropout);
  train->add_option("--lambda", lambda);
  train->add_option("--out", out_dir, "Output directory (default: <output_dir>/train/<cell>/seed-<seed>)");

  std::size_t budget = 0;
  std::string strategy;
  auto* tune_cmd = app.add_subcommand("tune", "Hyperparameter search on a dev set");
  tune_cmd->add_option("--arch", arch)->required();
  tune_cmd->add_option("--encoder", encoder)->required();
  tune_cmd->add_option("--dev", dev, "mstress|dreaddit")->required()->check(CLI::IsMember({"mstress", "dreaddit"}));
  tune_cmd->add_option("--budget", budget);
  tune_cmd->add_option("--strategy", strategy)->check(CLI::IsMember({"bayesian", "random"}));
  tune_cmd->add_option("--out", out_dir);

  std::string model_path, data_path, task = "stress", asset_cache;
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a canonical dataset file");
  evaluate->add_option("--model", model_path)->required();
  evaluate->add_option("--data", data_path)->required();
  evaluate->add_option("--task", task)->check(CLI::IsMember({"stress", "emotion"}));
  evaluate->add_option("--asset-cache", asset_cache);

  // experiment / report -----------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "Run a study");
  std::string study;
  experiment->add_option("study", study, "primary|reduction|emotions")->required()
      ->check(CLI::IsMember({"primary", "reduction", "emotions"}));
  experiment->add_option("--out", out_dir, "Study output directory (default: <output_dir>/<study>)");
  bool fresh = false;
  experiment->add_flag("--fresh", fresh, "Ignore cached manifests and retrain every run");

  auto* report = app.add_subcommand("report", "Re-render the primary grids from results records");
  std::string report_dir;
  report->add_option("--dir", report_dir, "Primary study directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    // corpus
    if (ingest->parsed()) {
      const ColumnSchema schema = schema_from(text_col, label_col, id_col, delimiter, label_format);
      const fs::path in_path = under_workspace(g, path);
      const LoadReport r = load_corpus(in_path, source_from_string(source), schema);
      std::cout << "records " << r.records << ", loaded " << r.examples.size() << ", rejected "
                << r.rejected.size() << "\n";
      if (source != "emotion") std::cout << "stressed share " << percent(r.positive_proportion()) << "\n";
      for (const auto& e : r.rejected) std::cout << "  record " << e.record << " (line " << e.line << "): " << e.message << "\n";
      if (g.dry_run || out.empty()) return 0;
      write_canonical(under_workspace(g, out), r.examples);
      std::cout << "wrote " << out << " (" << dataset_fingerprint(r.examples) << ")\n";
      return 0;
    }
    if (split->parsed()) {
      const auto examples = read_canonical(under_workspace(g, input));
      const DatasetSplit s = split_dataset(examples, parse_counts(counts), seed, name);
      std::cout << "train " << s.train.size() << ", dev " << s.dev.size() << ", test " << s.test.size() << "\n";
      if (g.dry_run) return 0;
      const fs::path dir = under_workspace(g, out_dir);
      fs::create_directories(dir);
      write_canonical(dir / (name + ".train.jsonl"), s.train);
      write_canonical(dir / (name + ".dev.jsonl"), s.dev);
      write_canonical(dir / (name + ".test.jsonl"), s.test);
      return 0;
    }
    if (reduce->parsed()) {
      DatasetSplit s;
      s.train = read_canonical(under_workspace(g, input));
      const auto plan = ReductionPlan::for_fraction(fraction, s.train.size(), seed);
      const auto reduced = reduce_training_set(s, plan);
      std::cout << "kept " << reduced.train.size() << " of " << s.train.size() << "\n";
      if (g.dry_run) return 0;
      write_canonical(under_workspace(g, out), reduced.train);
      return 0;
    }

    // taxonomy
    if (validate->parsed()) {
      const EmotionTaxonomy tax = mapping.empty() ? EmotionTaxonomy::builtin()
                                                  : EmotionTaxonomy::load(under_workspace(g, mapping));
      ColumnSchema schema = schema_from(text_col, label_col == "label" ? "labels" : label_col, "",
                                        delimiter, label_format);
      const LoadReport r = load_corpus(under_workspace(g, emotion_corpus), Source::EmotionCorpus, schema, tax);
      const TaxonomyReport t = validate_taxonomy(r.examples);
      std::cout << "examples " << t.total << " (rejected " << r.rejected.size() << ")\n";
      bool matches = true;
      for (std::size_t k = 0; k < kEmotionCount; ++k) {
        matches = matches && t.counts[k] == kPublishedCoarseCounts[k];
        std::printf("  %-9s %7zu  %6s  (reference %zu)\n", std::string(kEmotionNames[k]).c_str(), t.counts[k],
                    percent(t.proportions[k]).c_str(), kPublishedCoarseCounts[k]);
      }
      std::cout << (matches ? "counts match the reference table\n" : "counts differ from the reference table\n");
      return 0;
    }

    // Everything below needs a run config.
    if (train->parsed() || tune_cmd->parsed() || experiment->parsed()) {
      const RunConfig config = load_config(g);

      if (experiment->parsed()) {
        const fs::path dir = out_dir.empty() ? config.output_root() / study : under_workspace(g, out_dir);
        if (g.dry_run) {
          std::cout << "config ok; output would go to " << dir.string() << "\n";
          print_plan(plan_study(config, study));
          return 0;
        }
        const PreparedCorpora data = PreparedCorpora::load(config);
        data.write(dir / "data");
        io::write_file_atomically(dir / "config.json", config.to_json());
        const StudyOptions opts{dir, !fresh};
        if (study == "primary") {
          const auto r = primary_matrix(config, data, opts);
          std::cout << r.minority_test.render_text() << "\n" << r.stress_test.render_text() << "\n"
                    << r.minority_dev.render_text();
          std::size_t failed = 0;
          for (const auto& c : r.cells) failed += !c.ok;
          if (failed) std::cout << failed << " cell(s) failed; see failed_cells.tsv\n";
        } else if (study == "reduction") {
          const auto r = data_reduction_study(config, data, opts);
          std::cout << io::read_file(dir / "reduction.tsv");
        } else {
          const auto r = emotion_distribution_study(config, data, opts);
          std::printf("labeler macro F1 %.2f; cross-corpus L1 %.4f; within minority %.4f, within stress %.4f\n",
                      r.labeler_macro_f1, r.cross_corpus_l1, r.within_corpus_l1.at("minority"),
                      r.within_corpus_l1.at("stress"));
        }
        return 0;
      }

      const Architecture a = architecture_from_string(arch);
      const EncoderName e = encoder_from_string(encoder);
      const DevChoice d = dev_choice_from_string(dev);
      ModelConfig mc = config.default_model(a, e);

      if (train->parsed()) {
        if (lr) mc.learning_rate = *lr;
        if (dropout) mc.dropout = *dropout;
        if (lambda) mc.lambda = *lambda;
        mc.validate();
        const CellSpec cell{a, e, std::nullopt};
        const fs::path dir = out_dir.empty() ? config.output_root() / "train" / cell.id() / ("seed-" + std::to_string(seed))
                                             : under_workspace(g, out_dir);
        if (g.dry_run) {
          print_plan({"train " + cell.id() + " seed " + std::to_string(seed) + " with " + mc.to_json(),
                      "early-stop on " + std::string(d == DevChoice::Minority ? "minority" : "stress") + " dev",
                      "write model and manifest to " + dir.string()});
          return 0;
        }
        const PreparedCorpora data = PreparedCorpora::load(config);
        EncoderPool pool(config);
        const auto enc = pool.get(e);
        const ArchitectureData ad = architecture_data(data, d, data.stress.train);
        DataAccessLog access;
        TrainOptions opts = config.train_options();
        opts.access_log = &access;
        const auto start = std::chrono::steady_clock::now();
        const ArchitectureRun run = train_architecture(mc, *enc, ad, opts, seed);
        json reports = json::array();
        for (const auto& [label, set] : {std::pair{"minority-test", &data.minority.test},
                                         std::pair{"stress-test", &data.stress.test}}) {
          access.record({"evaluate", label, "test", dataset_fingerprint(*set), set->size()});
          const auto rep = evaluate_stress_model(run.result.model, *set, label, config.training.eval_batch_size);
          reports.push_back(json::parse(rep.to_json()));
          std::printf("%-14s F1 %s  accuracy %s\n", label, format_percent(rep.f1).c_str(),
                      format_percent(rep.accuracy).c_str());
        }
        json history = json::array();
        for (const auto& h : run.result.history)
          history.push_back({{"epoch", h.epoch}, {"steps", h.steps}, {"train_loss", h.train_loss},
                             {"dev_metric", h.dev_metric}, {"improved", h.improved}});
        json access_entries = json::array();
        for (const auto& x : access.entries())
          access_entries.push_back({{"phase", x.phase}, {"dataset", x.dataset}, {"partition", x.partition},
                                    {"fingerprint", x.fingerprint}, {"count", x.count}});
        const json manifest = {
            {"seed", seed},
            {"model", json::parse(mc.to_json())},
            {"dev", to_string(d)},
            {"data", {{"stress_train", ad.stress.train_fingerprint()}, {"dev", ad.stress.dev_fingerprint()}}},
            {"history", history},
            {"best_epoch", run.result.best_epoch},
            {"stop_reason", run.result.stop_reason},
            {"reports", reports},
            {"access_log", access_entries},
            {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
            {"config", json::parse(config.to_json())}};
        fs::create_directories(dir);
        save_model(run.result.model, config, dir / "model.safetensors", {{"seed", seed}});
        io::write_file_atomically(dir / "manifest.json", manifest.dump(2));
        std::cout << "wrote " << dir.string() << "\n";
        return 0;
      }

      // tune
      TunerOptions topts = config.tuner;
      if (budget) topts.budget = budget;
      if (!strategy.empty()) topts.strategy = tuner_strategy_from_string(strategy);
      const CellSpec cell{a, e, std::nullopt};
      const fs::path dir = out_dir.empty() ? config.output_root() / "tune" / (cell.id() + "__" + std::string(to_string(d)))
                                           : under_workspace(g, out_dir);
      if (g.dry_run) {
        print_plan({"tune " + cell.id() + " on " + std::string(to_string(d)) + " dev, " + std::to_string(topts.budget) +
                        " trials (" + std::string(to_string(topts.strategy)) + ")",
                    "write trials.jsonl and best.json to " + dir.string()});
        return 0;
      }
      const PreparedCorpora data = PreparedCorpora::load(config);
      EncoderPool pool(config);
      const auto enc = pool.get(e);
      const ArchitectureData ad = architecture_data(data, d, data.stress.train);
      fs::create_directories(dir);
      topts.log_path = dir / "trials.jsonl";
      fs::remove(*topts.log_path);
      std::optional<AssembledModel> labeler;
      if (a == Architecture::Multi)
        labeler.emplace(train_emotion_labeler(config.labeler_model(e), *enc, *ad.emotion, config.train_options(),
                                              config.seeds.seeds[0]));
      const auto result = tune(mc, make_training_objective(*enc, ad, config.train_options(), config.seeds.seeds[0],
                                                           labeler ? &*labeler : nullptr),
                               topts);
      io::write_file_atomically(dir / "best.json", json({{"config", json::parse(result.best.to_json())},
                                                         {"criterion", result.best_trial.criterion},
                                                         {"trials", result.trials.size()}})
                                                       .dump(2));
      std::printf("best dev F1 %.2f with %s\n", result.best_trial.criterion, result.best.to_json().c_str());
      return 0;
    }

    if (evaluate->parsed()) {
      const fs::path cache = asset_cache.empty() ? fs::path{} : fs::path(asset_cache);
      const AssembledModel model = load_model(under_workspace(g, model_path), cache);
      const auto examples = read_canonical(under_workspace(g, data_path));
      const auto rep = task == "stress" ? evaluate_stress_model(model, examples, data_path)
                                        : evaluate_emotion_model(model, examples, data_path);
      std::cout << rep.to_json() << "\n";
      return 0;
    }

    if (report->parsed()) {
      const auto r = load_primary_report(under_workspace(g, report_dir));
      std::cout << r.minority_test.render_text() << "\n" << r.stress_test.render_text() << "\n"
                << r.minority_dev.render_text();
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << json({{"error", e.what()}, {"kind", "config"}}).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", e.what()}, {"kind", "runtime"}}).dump() << "\n";
    return 1;
  }
  return 0;
}
