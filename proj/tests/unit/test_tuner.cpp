// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>

#include "emostress/tuner.hpp"
#include "synthetic.hpp"

using namespace emostress;
using namespace emostress::testing;

namespace {

// Negative quadratic in the unit cube with its maximum of 100 at (0.6, 0.3, 0.5).
double quadratic(const ModelConfig& c) {
  const SearchSpace space{c.architecture};
  const auto u = space.encode(c);
  const double target[] = {0.6, 0.3, 0.5};
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += (u[i] - target[i]) * (u[i] - target[i]);
  return 100.0 - 100.0 * d;
}

}  // namespace

TEST_CASE("search space bounds and the lambda dimension") {
  const SearchSpace single{Architecture::SingleTask}, multi{Architecture::Multi};
  CHECK(single.dimensions() == 2);
  CHECK(multi.dimensions() == 3);
  const auto base = tiny_config(Architecture::Multi);
  const std::vector<double> lo = {0, 0, 0}, hi = {1, 1, 1};
  CHECK(multi.decode(lo, base).learning_rate == doctest::Approx(1e-6));
  CHECK(multi.decode(hi, base).learning_rate == doctest::Approx(1e-3));
  CHECK(*multi.decode(hi, base).lambda == doctest::Approx(0.9));
  CHECK(multi.decode(hi, base).dropout == 1.0);
  const std::vector<double> mid = {0.5, 0.5};
  CHECK(single.decode(mid, tiny_config(Architecture::SingleTask)).learning_rate ==
        doctest::Approx(std::sqrt(1e-6 * 1e-3)));
  CHECK_FALSE(single.decode(mid, base).lambda);
  const auto round = multi.encode(multi.decode(std::vector<double>{0.25, 0.75, 0.5}, base));
  CHECK(round[0] == doctest::Approx(0.25));
  CHECK(round[2] == doctest::Approx(0.5));
}

TEST_CASE("every proposal stays inside the search box") {
  for (auto strategy : {TunerStrategy::Random, TunerStrategy::Bayesian}) {
    TunerOptions opts;
    opts.budget = 25;
    opts.strategy = strategy;
    opts.candidates = 200;
    const auto r = tune(tiny_config(Architecture::Multi), quadratic, opts);
    REQUIRE(r.trials.size() == 25);
    for (const auto& t : r.trials) {
      CHECK(t.config.learning_rate >= 1e-6);
      CHECK(t.config.learning_rate <= 1e-3);
      CHECK(t.config.dropout >= 0.0);
      CHECK(t.config.dropout <= 1.0);
      REQUIRE(t.config.lambda);
      CHECK(*t.config.lambda >= 0.0);
      CHECK(*t.config.lambda <= 0.9);
      CHECK_NOTHROW(t.config.validate());
    }
  }
}

TEST_CASE("budget of one returns the single sampled config") {
  TunerOptions opts;
  opts.budget = 1;
  const auto r = tune(tiny_config(Architecture::SingleTask), quadratic, opts);
  REQUIRE(r.trials.size() == 1);
  CHECK(r.best == r.trials[0].config);
  opts.budget = 0;
  CHECK_THROWS_AS(tune(tiny_config(Architecture::SingleTask), quadratic, opts), std::invalid_argument);
}

TEST_CASE("random search reaches a known optimum within five percent") {
  TunerOptions opts;
  opts.budget = 50;
  opts.strategy = TunerStrategy::Random;
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    opts.seed = seed;
    CHECK(tune(tiny_config(Architecture::Multi), quadratic, opts).best_trial.criterion >= 95.0);
    CHECK(tune(tiny_config(Architecture::SingleTask), quadratic, opts).best_trial.criterion >= 95.0);
  }
  opts.strategy = TunerStrategy::Bayesian;
  opts.budget = 30;
  CHECK(tune(tiny_config(Architecture::Multi), quadratic, opts).best_trial.criterion >= 99.0);
}

TEST_CASE("parallel random mode matches the sequential random trials") {
  TunerOptions opts;
  opts.budget = 12;
  opts.strategy = TunerStrategy::Random;
  opts.seed = 9;
  const auto seq = tune(tiny_config(Architecture::Multi), quadratic, opts);
  opts.workers = 4;
  const auto par = tune(tiny_config(Architecture::Multi), quadratic, opts);
  REQUIRE(par.trials.size() == seq.trials.size());
  for (std::size_t i = 0; i < seq.trials.size(); ++i) {
    CHECK(par.trials[i].config == seq.trials[i].config);
    CHECK(par.trials[i].criterion == seq.trials[i].criterion);
  }
}

TEST_CASE("failed trials are logged and all-failed is an error") {
  const auto log = std::filesystem::temp_directory_path() / "emostress_tuner_log.jsonl";
  std::filesystem::remove(log);
  TunerOptions opts;
  opts.budget = 8;
  opts.log_path = log;
  int calls = 0;
  const auto flaky = [&](const ModelConfig& c) {
    if (++calls % 2 == 0) throw std::runtime_error("diverged");
    return quadratic(c);
  };
  const auto r = tune(tiny_config(Architecture::SingleTask), flaky, opts);
  CHECK(r.trials.size() == 8);
  CHECK(r.best_trial.status == TrialStatus::Ok);
  std::ifstream in(log);
  std::size_t lines = 0, failed = 0;
  for (std::string line; std::getline(in, line); ++lines) failed += line.find("\"failed\"") != std::string::npos;
  CHECK(lines == 8);
  CHECK(failed == 4);
  std::filesystem::remove(log);

  opts.log_path.reset();
  CHECK_THROWS_AS(tune(tiny_config(Architecture::SingleTask),
                       [](const ModelConfig&) -> double { throw std::runtime_error("nope"); }, opts),
                  TuningError);
}

TEST_CASE("training objective scores dev F1 without touching test data") {
  const auto enc = TransformerEncoder::tiny_test();
  ArchitectureData data{TrainDevView{"stress", separable_stress_set(16, 1), separable_stress_set(8, 2)},
                        TrainDevView{"emotion", separable_emotion_set(16, 3), separable_emotion_set(8, 4)}};
  DataAccessLog access;
  auto train_opts = overfit_options(8);
  train_opts.access_log = &access;
  TunerOptions opts;
  opts.budget = 3;
  const auto r = tune(tiny_config(Architecture::Multi),
                      make_training_objective(enc, data, train_opts, 1), opts);
  CHECK(r.trials.size() == 3);
  for (const auto& t : r.trials) {
    CHECK(t.status == TrialStatus::Ok);
    CHECK(t.criterion >= 0.0);
    CHECK(t.criterion <= 100.0);
  }
  CHECK(access.leaks().empty());
  std::set<std::string> phases;
  for (const auto& e : access.entries()) phases.insert(e.phase);
  CHECK(phases.count("tune") == 1);
}
