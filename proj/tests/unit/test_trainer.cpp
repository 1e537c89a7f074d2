// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <vector>

#include "emostress/trainer.hpp"
#include "synthetic.hpp"

using namespace emostress;
using namespace emostress::testing;

namespace {

TrainDevView view(std::vector<TextExample> train, std::vector<TextExample> dev,
                  std::string name = "synthetic") {
  return TrainDevView{std::move(name), std::move(train), std::move(dev)};
}

TrainDevView self_view(std::vector<TextExample> data, std::string name = "synthetic") {
  auto dev = data;
  return view(std::move(data), std::move(dev), std::move(name));
}

std::size_t stop_epoch(const std::vector<double>& metrics, EarlyStopPolicy policy = {}) {
  EarlyStopping s(policy);
  for (double m : metrics) {
    s.observe(m);
    if (s.should_stop()) return s.epochs();
  }
  return 0;  // never stopped
}

}  // namespace

TEST_CASE("early stopping follows patience, tolerance and the epoch cap") {
  CHECK(stop_epoch({.5, .5, .5, .5, .5, .5}) == 6);
  CHECK(stop_epoch({.5, .5, .5, .5, .5}) == 0);
  // An improvement of exactly the tolerance does not reset patience.
  const double t = EarlyStopPolicy{}.tolerance;
  CHECK(stop_epoch({.5, .5 + t, .5 + t, .5 + t, .5 + t, .5 + t}) == 6);
  // Anything beyond the tolerance does.
  CHECK(stop_epoch({.5, .5, .5, .5, .5 + 2 * t, .5, .5, .5, .5, .5}) == 10);
  std::vector<double> rising;
  for (int i = 0; i < 30; ++i) rising.push_back(i);
  CHECK(stop_epoch(rising) == 20);

  EarlyStopping s;
  s.observe(0.3);
  s.observe(0.7);
  s.observe(0.6);
  CHECK(s.best() == 0.7);
  CHECK(s.best_epoch() == 2);
  EarlyStopping copy;
  copy.restore_json(s.to_json());
  CHECK(copy.best() == 0.7);
  CHECK(copy.since_improvement() == 1);
}

TEST_CASE("single-task training overfits a separable set and is deterministic") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto data = self_view(separable_stress_set(32, 1));
  const auto cfg = tiny_config(Architecture::SingleTask);
  const auto r = train_single_task(cfg, enc, Task::Stress, data, overfit_options(), 7);
  CHECK(r.steps <= 200);
  const auto report = evaluate_stress_model(r.model, data.train, "train");
  CHECK(report.f1 >= 95.0);

  double best = 0.0;
  for (const auto& h : r.history) best = std::max(best, h.dev_metric);
  CHECK(r.best_dev == best);
  CHECK(evaluate_stress_model(r.model, data.dev, "dev").f1 == doctest::Approx(best).epsilon(1e-12));

  TrainOptions short_run = overfit_options(20);
  const auto a = train_single_task(cfg, enc, Task::Stress, data, short_run, 3);
  const auto b = train_single_task(cfg, enc, Task::Stress, data, short_run, 3);
  const auto c = train_single_task(cfg, enc, Task::Stress, data, short_run, 4);
  CHECK(a.model.fingerprint() == b.model.fingerprint());
  CHECK(a.model.fingerprint() != c.model.fingerprint());
}

TEST_CASE("training rejects empty or unlabeled data") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto cfg = tiny_config(Architecture::SingleTask);
  CHECK_THROWS_AS(train_single_task(cfg, enc, Task::Stress, view({}, separable_stress_set(4, 1)),
                                    overfit_options(), 1),
                  TrainingError);
  auto unlabeled = separable_stress_set(4, 1);
  unlabeled[2].stress.reset();
  CHECK_THROWS_AS(train_single_task(cfg, enc, Task::Stress, self_view(unlabeled), overfit_options(), 1),
                  TrainingError);
}

TEST_CASE("fine-tune transfers the stage-1 encoder bit for bit") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto emotion = self_view(separable_emotion_set(16, 2), "emotion");
  const auto stress = self_view(separable_stress_set(16, 3), "stress");
  const auto cfg = tiny_config(Architecture::FineTune);
  const auto r = train_fine_tune(cfg, enc, emotion, stress, overfit_options(10), 5);
  CHECK(r.stage2_initial_fingerprint == r.transferred_fingerprint);
  CHECK(r.transferred_fingerprint == r.emotion_stage.model.encoder().fingerprint());
  CHECK(r.stress_stage.model.heads().stress);
  CHECK_FALSE(r.stress_stage.model.heads().emotion);
  CHECK_FALSE(r.stress_stage.history.empty());
}

TEST_CASE("alternation schedule is strict and fair") {
  CHECK(alternation_schedule(2) == std::vector<Task>{Task::Stress, Task::Emotion, Task::Stress, Task::Emotion});

  const auto enc = TransformerEncoder::tiny_test();
  const auto emotion = self_view(separable_emotion_set(40, 2), "emotion");
  const auto stress = self_view(separable_stress_set(20, 3), "stress");
  auto opts = overfit_options(1000, 8);
  opts.policy.max_epochs = 2;
  std::vector<Task> seen;
  opts.on_step = [&](const StepRecord& r) { seen.push_back(r.task); };
  const auto r = train_alternating(tiny_config(Architecture::MultiAlt), enc, emotion, stress, opts, 1);
  REQUIRE(seen.size() == 12);  // 3 stress batches per epoch, each followed by an emotion batch
  for (std::size_t i = 0; i < seen.size(); ++i)
    CHECK(seen[i] == (i % 2 == 0 ? Task::Stress : Task::Emotion));
  CHECK_FALSE(r.model.head_untouched(Task::Stress));
  CHECK_FALSE(r.model.head_untouched(Task::Emotion));
  CHECK(r.model.encoder().fingerprint() != enc.fingerprint());
}

TEST_CASE("disabling the emotion loss leaves the emotion head at init") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto emotion = self_view(separable_emotion_set(16, 2), "emotion");
  const auto stress = self_view(separable_stress_set(16, 3), "stress");
  auto opts = overfit_options(1000, 8);
  opts.policy.max_epochs = 1;
  opts.emotion_loss_scale = 0.0;
  const auto r = train_alternating(tiny_config(Architecture::MultiAlt), enc, emotion, stress, opts, 1);
  CHECK(r.model.head_untouched(Task::Emotion));
  CHECK_FALSE(r.model.head_untouched(Task::Stress));
  CHECK(r.model.encoder().fingerprint() != enc.fingerprint());
}

TEST_CASE("pseudo-labeling needs a frozen model and is deterministic") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto emotion = self_view(separable_emotion_set(16, 2), "emotion");
  auto opts = overfit_options(30);
  double f1 = -1;
  const auto labeler = train_emotion_labeler(tiny_config(Architecture::Multi), enc, emotion, opts, 1, &f1);
  CHECK(labeler.frozen());
  CHECK(f1 >= 0.0);
  const auto stress = separable_stress_set(12, 9);
  const auto a = pseudo_label_emotions(labeler, stress);
  const auto b = pseudo_label_emotions(labeler, stress);
  CHECK(a == b);
  for (const auto& ex : a) {
    REQUIRE(ex.emotions.has_value());
    CHECK(ex.emotions->any());
    CHECK(ex.emotion_is_pseudo);
  }
  AssembledModel unfrozen(tiny_config(Architecture::SingleTask), enc, HeadSet::for_task(Task::Emotion), 1);
  CHECK_THROWS_AS(pseudo_label_emotions(unfrozen, stress), std::logic_error);
}

TEST_CASE("joint training blends both losses with lambda") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto data = self_view(separable_stress_set(16, 4, true));
  auto first_step = [&](double lambda) {
    auto cfg = tiny_config(Architecture::Multi);
    cfg.lambda = lambda;
    StepRecord rec;
    auto opts = overfit_options(1);
    opts.on_step = [&](const StepRecord& r) { rec = r; };
    train_joint(cfg, enc, data, opts, 11);
    return rec;
  };
  const auto a = first_step(0.9), b = first_step(0.45);
  REQUIRE(a.stress_loss);
  CHECK(*a.stress_loss == *b.stress_loss);
  CHECK(*a.emotion_loss == *b.emotion_loss);
  CHECK(a.loss == 0.9 * *a.stress_loss + (1 - 0.9) * *a.emotion_loss);
  CHECK(b.loss == 0.45 * *b.stress_loss + (1 - 0.45) * *b.emotion_loss);

  auto missing = separable_stress_set(16, 4, true);
  missing[5].emotions.reset();
  int steps = 0;
  auto opts = overfit_options(5);
  opts.on_step = [&](const StepRecord&) { ++steps; };
  CHECK_THROWS_AS(train_joint(tiny_config(Architecture::Multi), enc, self_view(missing), opts, 1),
                  TrainingError);
  CHECK(steps == 0);
}

TEST_CASE("resuming from saved state reproduces an uninterrupted run") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto emotion = self_view(separable_emotion_set(24, 2), "emotion");
  const auto stress = self_view(separable_stress_set(16, 3), "stress");
  const auto cfg = tiny_config(Architecture::MultiAlt);
  auto opts = overfit_options(1000, 8);
  opts.policy.max_epochs = 4;

  TrainingSession straight(AssembledModel(cfg, enc, HeadSet::both(), 2), Procedure::Alternating,
                           stress, &emotion, opts, 2);
  const auto full = straight.run();

  const auto dir = std::filesystem::temp_directory_path() / "emostress_resume_test";
  std::filesystem::remove_all(dir);
  {
    TrainingSession first(AssembledModel(cfg, enc, HeadSet::both(), 2), Procedure::Alternating,
                          stress, &emotion, opts, 2);
    first.run_epoch();
    first.run_epoch();
    first.save_state(dir);
  }
  TrainingSession second(AssembledModel(cfg, enc, HeadSet::both(), 2), Procedure::Alternating,
                         stress, &emotion, opts, 2);
  second.load_state(dir);
  CHECK(second.history().size() == 2);
  const auto resumed = second.run();
  std::filesystem::remove_all(dir);
  CHECK(resumed.model.fingerprint() == full.model.fingerprint());
  REQUIRE(resumed.history.size() == full.history.size());
  for (std::size_t i = 0; i < full.history.size(); ++i)
    CHECK(resumed.history[i].train_loss == full.history[i].train_loss);
}

TEST_CASE("seeded runs average three seeds and fail as a unit") {
  SeedSet seeds;
  seeds.seeds = {1, 2, 3};
  const auto ok = run_seeded(
      [](std::uint64_t s) {
        MetricReport r;
        r.f1 = 68.0 + 2.0 * static_cast<double>(s);
        r.eval_set = "x";
        return std::vector<MetricReport>{r};
      },
      seeds);
  CHECK_FALSE(ok.failed);
  REQUIRE(ok.mean.size() == 1);
  CHECK(ok.mean[0].f1 == 72.0);

  const auto bad = run_seeded(
      [](std::uint64_t s) {
        if (s == 2) throw TrainingError("boom");
        return std::vector<MetricReport>{MetricReport{}};
      },
      seeds);
  CHECK(bad.failed);
  CHECK(bad.mean.empty());
  CHECK_FALSE(bad.runs[1].ok);

  const std::vector<std::uint64_t> two = {1, 2};
  CHECK_THROWS(SeedSet::from(two));
}

TEST_CASE("training phases never read test partitions") {
  DataAccessLog log;
  auto opts = overfit_options(4);
  opts.access_log = &log;
  const auto enc = TransformerEncoder::tiny_test();
  ArchitectureData data{self_view(separable_stress_set(8, 1), "stress"),
                        self_view(separable_emotion_set(8, 2), "emotion")};
  train_architecture(tiny_config(Architecture::Multi), enc, data, opts, 1);
  CHECK_FALSE(log.entries().empty());
  CHECK(log.leaks().empty());
  log.record({"train", "stress", "test", "x", 1});
  CHECK(log.leaks().size() == 1);
}
