// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <vector>

#include "emostress/core/rng.hpp"
#include "emostress/evalkit.hpp"

using namespace emostress;

namespace {

// Precision/recall route, independent of the tp/fp/fn shortcut in the library.
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

std::vector<int> random_labels(Rng& rng, std::size_t n) {
  std::vector<int> v(n);
  for (int& x : v) x = static_cast<int>(rng.below(2));
  return v;
}

}  // namespace

TEST_CASE("hand-checked binary examples") {
  const std::vector<int> p = {1, 1, 0, 0}, g = {1, 0, 1, 0};
  CHECK(binary_f1(p, g).value == 50.0);
  CHECK(accuracy(p, g) == 50.0);
  const std::vector<int> mixed = {1, 0, 1, 1, 0};
  CHECK(binary_f1(mixed, mixed).value == 100.0);
  CHECK(accuracy(mixed, mixed) == 100.0);
  CHECK(accuracy(std::vector<int>{1, 0}, std::vector<int>{0, 1}) == 0.0);
  CHECK(accuracy(std::vector<int>{1, 0, 1, 1}, std::vector<int>{1, 0, 1, 0}) == 75.0);
}

TEST_CASE("zero-division convention is flagged") {
  const std::vector<int> none = {0, 0, 0};
  const auto s = binary_f1(none, none);
  CHECK(s.value == 0.0);
  CHECK(s.degenerate);
  CHECK_FALSE(binary_f1(std::vector<int>{0, 1}, std::vector<int>{1, 0}).degenerate);
  CHECK_THROWS_AS(binary_f1(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST_CASE("metrics agree with a brute-force oracle on 1000 random vectors") {
  Rng rng(42, RngStream::Sampling);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(60);
    const auto p = random_labels(rng, n), g = random_labels(rng, n);
    CHECK(binary_f1(p, g).value == doctest::Approx(oracle_f1(p, g)).epsilon(1e-12));
    std::size_t right = 0;
    for (std::size_t i = 0; i < n; ++i) right += p[i] == g[i];
    CHECK(accuracy(p, g) == doctest::Approx(100.0 * right / n).epsilon(1e-12));
    const auto c = ConfusionCounts::from(p, g);
    CHECK(c.total() == n);
  }
}

TEST_CASE("metrics are invariant to example order") {
  Rng rng(5, RngStream::Sampling);
  auto p = random_labels(rng, 40), g = random_labels(rng, 40);
  const double f1 = binary_f1(p, g).value, acc = accuracy(p, g);
  std::vector<std::size_t> order(40);
  for (std::size_t i = 0; i < 40; ++i) order[i] = i;
  rng.shuffle(std::span(order));
  std::vector<int> p2, g2;
  for (auto i : order) {
    p2.push_back(p[i]);
    g2.push_back(g[i]);
  }
  CHECK(binary_f1(p2, g2).value == f1);
  CHECK(accuracy(p2, g2) == acc);
}

TEST_CASE("macro F1 decomposes into seven binary F1 calls") {
  Rng rng(6, RngStream::Sampling);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<EmotionVector> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < kEmotionCount; ++k) {
        p[i].set(k, rng.below(3) == 0);
        g[i].set(k, rng.below(3) == 0);
      }
    double sum = 0.0;
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      std::vector<int> pk(n), gk(n);
      for (std::size_t i = 0; i < n; ++i) {
        pk[i] = p[i].test(k);
        gk[i] = g[i].test(k);
      }
      sum += oracle_f1(pk, gk);
    }
    CHECK(macro_f1(p, g).value == doctest::Approx(sum / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("macro F1 toy set checked by hand") {
  // Two examples. anger: pred {1,0} gold {1,1} -> F1 2/3. joy: pred {0,1}
  // gold {0,1} -> 1. Other five labels never occur -> 0 each (flagged).
  const std::vector<std::vector<int>> p = {{1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0, 0}};
  const std::vector<std::vector<int>> g = {{1, 0, 0, 0, 0, 0, 0}, {1, 0, 0, 1, 0, 0, 0}};
  const auto m = macro_f1(std::span(p), std::span(g));
  CHECK(m.per_label[0].value == doctest::Approx(200.0 / 3.0));
  CHECK(m.per_label[3].value == 100.0);
  CHECK(m.per_label[1].degenerate);
  CHECK(m.value == doctest::Approx((200.0 / 3.0 + 100.0) / 7.0));
  const std::vector<std::vector<int>> narrow = {{1, 0}};
  CHECK_THROWS(macro_f1(std::span(narrow), std::span(narrow)));
  const std::vector<EmotionVector> perfect = {EmotionVector("1010101"), EmotionVector("0101010")};
  CHECK(macro_f1(perfect, perfect).value == 100.0);
}

TEST_CASE("report means and grid rendering") {
  std::vector<MetricReport> runs(3);
  const double f1s[] = {70, 72, 74};
  for (int i = 0; i < 3; ++i) {
    runs[i].f1 = f1s[i];
    runs[i].accuracy = 80;
    runs[i].eval_set = "minority-test";
  }
  const auto mean = MetricReport::mean(runs);
  CHECK(mean.f1 == 72.0);
  CHECK(MetricReport::from_json(mean.to_json()).f1 == 72.0);

  ResultsGrid grid("minority", {"Single-Task", "Multi"}, {"BERT", "RoBERTa"});
  MetricReport a = mean, b = mean;
  b.f1 = 78.529;
  grid.set("Single-Task", "BERT", a);
  grid.set("Multi", "BERT", b);
  grid.set_reference("Prior best", kPriorMinorityF1);
  const auto text = grid.render_text();
  CHECK(text.find("**78.53**") != std::string::npos);
  CHECK(text.find("| 72.00 |") != std::string::npos);
  CHECK(text.find(" - | - |") != std::string::npos);  // RoBERTa column absent, not zero
  CHECK(text.find("75.00") != std::string::npos);
  CHECK(grid.render_jsonl().find("\"encoder\":\"BERT\"") != std::string::npos);
  CHECK_THROWS(grid.set("Nope", "BERT", a));
}

TEST_CASE("full grid bolds every column maximum") {
  const std::vector<std::string> rows = {"Single-Task", "Fine-Tune", "Multi-Alt", "Multi"};
  const std::vector<std::string> cols = {"BERT", "RoBERTa", "MentalBERT", "MentalRoBERTa"};
  ResultsGrid grid("stress", rows, cols);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      MetricReport m;
      m.f1 = 60.0 + r + c;
      m.accuracy = 90.0 - r - c;
      grid.set(rows[r], cols[c], m);
    }
  const auto text = grid.render_text();
  std::size_t bold = 0;
  for (std::size_t pos = 0; (pos = text.find("**", pos)) != std::string::npos; pos += 2) ++bold;
  CHECK(bold == 16);  // 4 F1 maxima + 4 accuracy maxima, two markers each
  std::size_t lines = 0;
  for (char ch : grid.render_jsonl()) lines += ch == '\n';
  CHECK(lines == 16);
}
