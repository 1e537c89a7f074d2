// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks, one output line per criterion.
//
//   desk  properties on synthetic data and the tiny encoder; always runnable
//   data  corpus and taxonomy statistics; needs EMOSTRESS_DATA_CONFIG, a run
//         config whose corpora point at the real files
//   full  reproduction targets read from finished study directories; needs
//         EMOSTRESS_RESULTS_DIR holding primary/, reduction/ and emotions/
//
// Exit status: 0 when nothing failed, 1 on any hard failure, 77 when every
// criterion of the tier was skipped. Full-scale targets are soft: a miss
// prints FAIL with its delta but only changes the exit status under --strict.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/corpus.hpp"
#include "emostress/emotaxonomy.hpp"
#include "emostress/evalkit.hpp"
#include "emostress/experiments.hpp"
#include "emostress/io/atomic_file.hpp"
#include "emostress/runconfig.hpp"
#include "emostress/trainer.hpp"
#include "synthetic.hpp"

using namespace emostress;
using namespace emostress::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

/// Collects sub-check failures so one criterion reports all of them.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Outcome outcome(std::string detail_on_pass = {}) const {
    if (failures_.empty()) return {Status::Pass, std::move(detail_on_pass)};
    std::string d;
    for (const auto& f : failures_) d += (d.empty() ? "" : "; ") + f;
    return {Status::Fail, d};
  }

 private:
  std::vector<std::string> failures_;
};

Outcome skip(std::string why) { return {Status::Skip, std::move(why)}; }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, values.size());
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

EmotionVector emotions(std::initializer_list<Emotion> list) {
  EmotionVector v;
  for (Emotion e : list) v.set(static_cast<std::size_t>(e));
  return v;
}

std::vector<TextExample> texts(std::initializer_list<const char*> list) {
  std::vector<TextExample> out;
  for (const char* t : list) out.push_back(TextExample{"x", t, Source::StressCorpus, {}, {}, false});
  return out;
}

TrainDevView self_view(std::vector<TextExample> data, std::string name) {
  auto dev = data;
  return TrainDevView{std::move(name), std::move(data), std::move(dev)};
}

// ---------------------------------------------------------------- desk tier

Outcome loss_correctness() {
  Checker c;
  const int one[] = {1}, zero[] = {0};
  c.expect(std::abs(stress_loss(row({0, 0}), zero).value - std::log(2.0)) < 1e-6, "stress loss at equal logits");
  c.expect(std::abs(stress_loss(row({1.0, -1.0}), one).value - 2.1269280110) < 1e-6, "stress loss [1,-1] gold 1");
  const EmotionVector any[] = {emotions({Emotion::Joy, Emotion::Fear})};
  c.expect(std::abs(emotion_loss(Matrix(1, 7), any).value - std::log(2.0)) < 1e-6, "emotion loss at zero logits");
  Matrix single(1, 7, -40.0);
  single(0, 0) = 1.0;
  const EmotionVector anger[] = {emotions({Emotion::Anger})};
  c.expect(std::abs(emotion_loss(single, anger).value - 0.3132616875 / 7.0) < 1e-6, "emotion loss single label");

  Rng rng(17, RngStream::Sampling);
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform(0, 5), e = rng.uniform(0, 5), lambda = 0.9 * rng.uniform();
    if (combined_loss(s, e, lambda) != lambda * s + (1.0 - lambda) * e) {
      c.expect(false, "combined loss not exactly affine");
      break;
    }
  }

  // Central differences on the joint objective.
  auto cfg = tiny_config(Architecture::Multi);
  AssembledModel model(cfg, TransformerEncoder::tiny_test(), HeadSet::both(), 9);
  const auto tokens = tokenize_examples(
      model.encoder(), texts({"i cannot cope with this deadline", "lovely day at the park", "meh"}));
  const std::vector<int> gold = {1, 0, 0};
  const std::vector<EmotionVector> gold_e = {emotions({Emotion::Fear, Emotion::Sadness}),
                                             emotions({Emotion::Joy}), emotions({Emotion::Neutral})};
  const double lambda = 0.3;
  const Rng dropout_seed(21, RngStream::Dropout);
  auto loss = [&] {
    Rng r = dropout_seed;
    const auto out = model.forward(tokens, HeadSet::both(), Mode::Train, &r);
    return combined_loss(stress_loss(out.stress_logits, gold).value,
                         emotion_loss(out.emotion_logits, gold_e).value, lambda);
  };
  model.zero_grad();
  {
    Rng r = dropout_seed;
    const auto out = model.forward(tokens, HeadSet::both(), Mode::Train, &r);
    auto ls = stress_loss(out.stress_logits, gold);
    auto le = emotion_loss(out.emotion_logits, gold_e);
    for (double& g : ls.grad.values()) g *= lambda;
    for (double& g : le.grad.values()) g *= 1.0 - lambda;
    model.backward(out, &ls.grad, &le.grad);
  }
  Rng pick(2, RngStream::Sampling);
  const auto params = model.parameters();
  int checked = 0;
  double worst = 0.0;
  for (int attempt = 0; attempt < 400 && checked < 20; ++attempt) {
    Parameter* p = attempt % 4 == 0 ? params[params.size() - 1 - pick.below(4)] : params[pick.below(params.size())];
    const std::size_t idx = pick.below(p->value.size());
    const double analytic = p->grad.data()[idx];
    if (std::abs(analytic) < 1e-7) continue;
    const double h = 1e-5, saved = p->value.data()[idx];
    p->value.data()[idx] = saved + h;
    const double up = loss();
    p->value.data()[idx] = saved - h;
    const double down = loss();
    p->value.data()[idx] = saved;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - analytic) / std::max(std::abs(numeric), 1e-3));
    ++checked;
  }
  c.expect(checked == 20, "fewer than 20 parameters checked");
  c.expect(worst <= 1e-4, "finite-difference mismatch " + fmt("%.2e", worst));
  return c.outcome("worst relative gradient error " + fmt("%.2e", worst));
}

Outcome gradient_routing() {
  Checker c;
  AssembledModel model(tiny_config(Architecture::Multi), TransformerEncoder::tiny_test(), HeadSet::both(), 5);
  const auto tokens = tokenize_examples(model.encoder(), texts({"so stressed", "calm"}));
  const std::vector<int> gold = {1, 0};
  const std::vector<EmotionVector> gold_e = {emotions({Emotion::Fear}), emotions({Emotion::Joy})};
  model.zero_grad();
  Rng r(1, RngStream::Dropout);
  const auto out = model.forward(tokens, HeadSet::both(), Mode::Train, &r);
  auto ls = stress_loss(out.stress_logits, gold);
  auto le = emotion_loss(out.emotion_logits, gold_e);
  for (double& g : ls.grad.values()) g *= 0.0;
  model.backward(out, &ls.grad, &le.grad);
  bool zero = true;
  for (double g : model.head(Task::Stress).weight.grad.values()) zero = zero && g == 0.0;
  for (double g : model.head(Task::Stress).bias.grad.values()) zero = zero && g == 0.0;
  c.expect(zero, "lambda 0 leaves a nonzero stress-head gradient");

  const auto enc = TransformerEncoder::tiny_test();
  auto opts = overfit_options(1000, 8);
  opts.policy.max_epochs = 1;
  opts.emotion_loss_scale = 0.0;
  const auto alt = train_alternating(tiny_config(Architecture::MultiAlt), enc,
                                     self_view(separable_emotion_set(16, 2), "emotion"),
                                     self_view(separable_stress_set(16, 3), "stress"), opts, 1);
  c.expect(alt.model.head_untouched(Task::Emotion), "emotion head moved with its loss disabled");
  c.expect(alt.model.encoder().fingerprint() != enc.fingerprint(), "encoder did not move");
  return c.outcome();
}

Outcome fine_tune_transfer() {
  Checker c;
  const auto r = train_fine_tune(tiny_config(Architecture::FineTune), TransformerEncoder::tiny_test(),
                                 self_view(separable_emotion_set(16, 2), "emotion"),
                                 self_view(separable_stress_set(16, 3), "stress"), overfit_options(10), 5);
  c.expect(r.stage2_initial_fingerprint == r.transferred_fingerprint, "stage-2 start differs from transfer");
  c.expect(r.transferred_fingerprint == r.emotion_stage.model.encoder().fingerprint(),
           "transfer differs from the stage-1 encoder");
  return c.outcome();
}

Outcome early_stopping() {
  Checker c;
  const EarlyStopPolicy p;
  c.expect(p.max_epochs == 20 && p.patience == 5 && p.tolerance == 1e-4, "default policy");
  auto stop_epoch = [](const std::vector<double>& metrics) -> std::size_t {
    EarlyStopping s;
    for (double m : metrics) {
      s.observe(m);
      if (s.should_stop()) return s.epochs();
    }
    return 0;
  };
  std::vector<double> rising(30);
  std::iota(rising.begin(), rising.end(), 0.0);
  const double t = p.tolerance;
  const std::vector<std::pair<std::vector<double>, std::size_t>> scripts = {
      {{.5, .5, .5, .5, .5, .5}, 6},
      {{.5, .5, .5, .5, .5}, 0},
      {{.5, .5 + t, .5 + t, .5 + t, .5 + t, .5 + t}, 6},
      {{.5, .5, .5, .5, .5 + 2 * t, .5, .5, .5, .5, .5}, 10},
      {{.1, .2, .3, .2, .2, .2, .2, .2}, 8},
      {rising, 20},
  };
  for (std::size_t i = 0; i < scripts.size(); ++i)
    c.expect(stop_epoch(scripts[i].first) == scripts[i].second, "script " + std::to_string(i + 1));
  return c.outcome(std::to_string(scripts.size()) + " scripted sequences");
}

Outcome overfit_smoke() {
  Checker c;
  const auto enc = TransformerEncoder::tiny_test();
  const auto stress = self_view(separable_stress_set(32, 1), "stress");
  const auto emotion = self_view(separable_emotion_set(32, 2), "emotion");
  std::string detail;
  for (Architecture a : kArchitectures) {
    ArchitectureData data{stress, emotion};
    const auto run = train_architecture(tiny_config(a), enc, data, overfit_options(200), 7);
    const double f1 = evaluate_stress_model(run.result.model, stress.train, "train").f1;
    const std::string name(display_name(a));
    c.expect(run.result.steps <= 200, name + " took " + std::to_string(run.result.steps) + " steps");
    c.expect(f1 >= 95.0, name + " train F1 " + fmt("%.2f", f1));
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt("%.1f", f1);
  }
  return c.outcome(detail);
}

double oracle_f1(const std::vector<int>& p, const std::vector<int>& g) {
  double tp = 0, pred_pos = 0, gold_pos = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] == 1 && g[i] == 1;
    pred_pos += p[i] == 1;
    gold_pos += g[i] == 1;
  }
  const double precision = pred_pos > 0 ? tp / pred_pos : 0.0;
  const double recall = gold_pos > 0 ? tp / gold_pos : 0.0;
  return precision + recall > 0 ? 100.0 * 2 * precision * recall / (precision + recall) : 0.0;
}

Outcome metrics() {
  Checker c;
  const std::vector<int> hp = {1, 1, 0, 0}, hg = {1, 0, 1, 0};
  c.expect(binary_f1(hp, hg).value == 50.0, "hand-checked F1");
  Rng rng(42, RngStream::Sampling);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> p(n), g(n);
    std::vector<std::vector<int>> pe(n, std::vector<int>(7)), ge(n, std::vector<int>(7));
    double agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(2));
      g[i] = static_cast<int>(rng.below(2));
      agree += p[i] == g[i];
      for (std::size_t k = 0; k < 7; ++k) {
        pe[i][k] = static_cast<int>(rng.below(2));
        ge[i][k] = static_cast<int>(rng.below(2));
      }
    }
    double macro = 0;
    for (std::size_t k = 0; k < 7; ++k) {
      std::vector<int> pk(n), gk(n);
      for (std::size_t i = 0; i < n; ++i) pk[i] = pe[i][k], gk[i] = ge[i][k];
      macro += oracle_f1(pk, gk) / 7.0;
    }
    bad += std::abs(binary_f1(p, g).value - oracle_f1(p, g)) > 1e-9;
    bad += std::abs(accuracy(p, g) - 100.0 * agree / static_cast<double>(n)) > 1e-9;
    bad += std::abs(macro_f1(pe, ge).value - macro) > 1e-9;
  }
  c.expect(bad == 0, std::to_string(bad) + " disagreements with the oracle");
  return c.outcome("1000 random vectors");
}

std::vector<TextExample> numbered(std::size_t n) {
  std::vector<TextExample> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i].id = std::to_string(i);
    v[i].text = "t";
    v[i].stress = i % 5 < 2 ? StressLabel::Stressed : StressLabel::NotStressed;
  }
  return v;
}

std::vector<std::string> ids(const std::vector<TextExample>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.id);
  return out;
}

Outcome data_plumbing(const fs::path& config_path) {
  Checker c;
  // Split counts come from the config defaults, not from literals here.
  auto j = json::parse(io::read_file(config_path));
  for (const char* corpus : {"stress", "minority", "emotion"}) j["corpora"][corpus].erase("split");
  const RunConfig config = RunConfig::parse(j.dump(), config_path.parent_path());
  c.expect(config.stress.split == SplitCounts{2122, 716, 715}, "stress split counts");
  c.expect(config.emotion.split == SplitCounts{42409, 5425, 5426}, "emotion split counts");
  c.expect(config.minority.split == SplitCounts{0, 175, 175}, "minority split counts");
  for (const CorpusConfig* corpus : {&config.stress, &config.emotion, &config.minority}) {
    const auto s = split_dataset(numbered(corpus->split.total()), corpus->split, config.split_seed);
    c.expect(s.counts() == corpus->split, "split of " + std::to_string(corpus->split.total()));
  }

  const auto stress = split_dataset(numbered(config.stress.split.total()), config.stress.split, config.split_seed);
  const std::map<double, std::size_t> expected = {{0.10, 212}, {0.25, 530}, {0.50, 1060}, {0.75, 1591}, {1.00, 2122}};
  for (const auto& [fraction, count] : expected) {
    const auto reduced = reduce_training_set(
        stress, ReductionPlan::for_fraction(fraction, stress.train.size(), config.reduction_seed));
    c.expect(reduced.train.size() == count, "reduction " + fmt("%.2f", fraction));
    c.expect(reduced.dev == stress.dev && reduced.test == stress.test, "reduction touched dev/test");
  }

  const auto a = split_dataset(numbered(500), {300, 100, 100}, 11);
  const auto b = split_dataset(numbered(500), {300, 100, 100}, 11);
  const auto other = split_dataset(numbered(500), {300, 100, 100}, 12);
  c.expect(ids(a.train) == ids(b.train) && ids(a.test) == ids(b.test), "same seed, different split");
  c.expect(ids(a.train) != ids(other.train), "different seeds, same split");
  return c.outcome();
}

// ---------------------------------------------------------------- data tier

std::optional<fs::path> env_path(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

Outcome corpus_stats(const RunConfig& config) {
  Checker c;
  const auto taxonomy = config.taxonomy ? EmotionTaxonomy::load(config.resolve(*config.taxonomy))
                                        : EmotionTaxonomy::builtin();
  struct Expect {
    const CorpusConfig& corpus;
    Source source;
    std::size_t n;
    std::optional<double> positive;
  };
  std::string detail;
  for (const Expect& e : {Expect{config.stress, Source::StressCorpus, 3553, 0.523},
                          Expect{config.minority, Source::MinorityCorpus, 350, 0.414},
                          Expect{config.emotion, Source::EmotionCorpus, 58009, std::nullopt}}) {
    const auto report = load_corpus(config.resolve(e.corpus.path), e.source, e.corpus.schema, taxonomy);
    const std::string name(to_string(e.source));
    c.expect(report.examples.size() == e.n,
             name + " has " + std::to_string(report.examples.size()) + " examples, expected " + std::to_string(e.n));
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(report.examples.size());
    if (e.positive) {
      const double share = report.positive_proportion();
      c.expect(std::abs(share - *e.positive) <= 0.001 + 1e-12,
               name + " positive share " + fmt("%.4f", share) + ", expected " + fmt("%.3f", *e.positive));
      detail += " (" + fmt("%.1f%%", 100 * share) + ")";
    }
  }
  return c.outcome(detail);
}

Outcome taxonomy_counts(const RunConfig& config) {
  Checker c;
  const auto taxonomy = config.taxonomy ? EmotionTaxonomy::load(config.resolve(*config.taxonomy))
                                        : EmotionTaxonomy::builtin();
  const auto loaded = load_corpus(config.resolve(config.emotion.path), Source::EmotionCorpus,
                                  config.emotion.schema, taxonomy);
  const auto report = validate_taxonomy(loaded.examples);
  for (std::size_t k = 0; k < kEmotionCount; ++k)
    c.expect(report.counts[k] == kPublishedCoarseCounts[k],
             std::string(kEmotionNames[k]) + " " + std::to_string(report.counts[k]) + " vs " +
                 std::to_string(kPublishedCoarseCounts[k]));
  return c.outcome();
}

// ---------------------------------------------------------------- full tier

/// A soft target: PASS inside the band, otherwise FAIL with the delta.
void within(Checker& c, std::string& detail, const std::string& what, double got, double target, double band) {
  const double delta = got - target;
  detail += (detail.empty() ? "" : ", ") + what + " " + fmt("%.2f", got) + " (" + fmt("%+.2f", delta) + ")";
  c.expect(std::abs(delta) <= band, what + " off by " + fmt("%+.2f", delta));
}

std::optional<double> grid_f1(const ResultsGrid& grid, Architecture a, EncoderName e) {
  const auto r = grid.get(std::string(display_name(a)), std::string(display_name(e)));
  if (!r) return std::nullopt;
  return r->f1;
}

Outcome single_task_targets(const fs::path& results) {
  if (!fs::exists(results / "primary" / "grids.jsonl")) return skip("no primary study results");
  const auto report = load_primary_report(results / "primary");
  const auto stress = grid_f1(report.stress_test, Architecture::SingleTask, EncoderName::BaseGeneral);
  const auto minority = grid_f1(report.minority_test, Architecture::SingleTask, EncoderName::BaseGeneral);
  if (!stress || !minority) return skip("primary results lack the Single-Task/BASE_GENERAL cell");
  Checker c;
  std::string detail;
  within(c, detail, "stress-test F1", *stress, 77.70, 2.0);
  within(c, detail, "minority-test F1", *minority, 69.85, 3.0);
  auto o = c.outcome(detail);
  if (o.status == Status::Fail) o.detail = detail + " | " + o.detail;
  return o;
}

Outcome multi_targets(const fs::path& results) {
  if (!fs::exists(results / "primary" / "grids.jsonl")) return skip("no primary study results");
  const auto report = load_primary_report(results / "primary");
  const auto multi = grid_f1(report.minority_test, Architecture::Multi, EncoderName::RobustMental);
  const auto single = grid_f1(report.minority_test, Architecture::SingleTask, EncoderName::RobustMental);
  if (!multi || !single) return skip("primary results lack the ROBUST_MENTAL cells");
  Checker c;
  std::string detail;
  within(c, detail, "minority-test F1", *multi, 78.53, 3.0);
  c.expect(*multi > *single, "not above Single-Task " + fmt("%.2f", *single));
  detail += ", Single-Task " + fmt("%.2f", *single);
  auto o = c.outcome(detail);
  if (o.status == Status::Fail) o.detail = detail + " | " + o.detail;
  return o;
}

Outcome reduction_shape(const fs::path& results) {
  const auto tsv = results / "reduction" / "reduction.tsv";
  if (!fs::exists(tsv)) return skip("no reduction study results");
  // architecture, encoder, fraction, train_size, f1, accuracy
  std::map<std::string, std::map<std::string, double>> half;  // encoder -> architecture -> F1
  std::istringstream in(io::read_file(tsv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream cols(line);
    for (std::string cell; std::getline(cols, cell, '\t');) f.push_back(cell);
    if (f.size() < 6 || f[2] != "0.50" || f[4] == "-") continue;
    half[f[1]][f[0]] = std::stod(f[4]);
  }
  const std::string multi(display_name(Architecture::Multi)), single(display_name(Architecture::SingleTask));
  std::size_t compared = 0, holds = 0;
  for (const auto& [encoder, by_arch] : half) {
    if (!by_arch.contains(multi) || !by_arch.contains(single)) continue;
    ++compared;
    holds += by_arch.at(multi) >= by_arch.at(single);
  }
  if (compared < 4) return skip("reduction results cover " + std::to_string(compared) + " of 4 encoders");
  Checker c;
  const std::string detail = std::to_string(holds) + " of " + std::to_string(compared) + " encoders";
  c.expect(holds >= 3, detail);
  return c.outcome(detail);
}

Outcome labeler_and_ordering(const fs::path& results) {
  const auto path = results / "emotions" / "summary.json";
  if (!fs::exists(path)) return skip("no emotion distribution results");
  const auto summary = json::parse(io::read_file(path));
  Checker c;
  std::string detail;
  within(c, detail, "labeler macro F1", summary.at("labeler_test_macro_f1").get<double>(), 61.13, 3.0);
  c.expect(summary.at("ordering_holds").get<bool>(), "cross-corpus L1 does not exceed within-corpus L1");
  detail += ", cross-corpus L1 " + fmt("%.3f", summary.at("cross_corpus_l1").get<double>());
  auto o = c.outcome(detail);
  if (o.status == Status::Fail) o.detail = detail + " | " + o.detail;
  return o;
}

// ---------------------------------------------------------------- driver

struct Criterion {
  int number;
  std::string tier;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string tier = "desk";
  bool strict = false;
  app.add_option("--tier", tier, "desk|data|full|all")->check(CLI::IsMember({"desk", "data", "full", "all"}));
  app.add_flag("--strict", strict, "Count soft full-scale misses as failures");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  const fs::path fixture_config = fs::path(EMOSTRESS_FIXTURE_DIR) / "configs" / "tiny.json";
  const auto data_config = env_path("EMOSTRESS_DATA_CONFIG");
  const auto results = env_path("EMOSTRESS_RESULTS_DIR");

  auto with_data = [&](std::function<Outcome(const RunConfig&)> fn) {
    return [=]() -> Outcome {
      if (!data_config) return skip("EMOSTRESS_DATA_CONFIG not set");
      return fn(RunConfig::load(*data_config));
    };
  };
  auto with_results = [&](std::function<Outcome(const fs::path&)> fn) {
    return [=]() -> Outcome {
      if (!results) return skip("EMOSTRESS_RESULTS_DIR not set");
      return fn(*results);
    };
  };

  const std::vector<Criterion> criteria = {
      {1, "desk", "loss correctness", loss_correctness},
      {2, "desk", "gradient routing", gradient_routing},
      {3, "desk", "fine-tune transfer", fine_tune_transfer},
      {4, "desk", "early stopping", early_stopping},
      {5, "desk", "overfit smoke", overfit_smoke},
      {6, "desk", "metrics", metrics},
      {7, "desk", "data plumbing", [&] { return data_plumbing(fixture_config); }},
      {8, "data", "corpus statistics", with_data(corpus_stats)},
      {9, "data", "taxonomy counts", with_data(taxonomy_counts)},
      {10, "full", "Single-Task BASE_GENERAL targets", with_results(single_task_targets)},
      {11, "full", "MULTI ROBUST_MENTAL targets", with_results(multi_targets)},
      {12, "full", "reduction study shape", with_results(reduction_shape)},
      {13, "full", "emotion labeler and distribution ordering", with_results(labeler_and_ordering)},
  };

  std::size_t ran = 0, failed = 0, skipped = 0;
  for (const auto& c : criteria) {
    if (tier != "all" && c.tier != tier) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("error: ") + e.what()};
    }
    const bool soft = c.tier == "full";
    const char* word = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
    std::printf("%s criterion %2d [%s] %s%s%s%s\n", word, c.number, c.tier.c_str(), c.name.c_str(),
                o.detail.empty() ? "" : ": ", o.detail.c_str(),
                soft && o.status == Status::Fail ? " (soft target)" : "");
    std::fflush(stdout);
    if (o.status == Status::Skip) ++skipped;
    if (o.status == Status::Fail && (!soft || strict || o.detail.rfind("error:", 0) == 0)) ++failed;
  }
  if (failed > 0) return 1;
  if (ran > 0 && skipped == ran) return 77;
  return 0;
}
