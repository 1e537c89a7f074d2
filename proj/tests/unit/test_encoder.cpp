// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emostress/encoder.hpp"
#include "emostress/io/atomic_file.hpp"

using namespace emostress;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EMOSTRESS_FIXTURE_DIR;

std::vector<TokenizedInput> tokenize_all(const TransformerEncoder& enc,
                                         const std::vector<std::string>& texts) {
  std::vector<TokenizedInput> out;
  for (const auto& t : texts) out.push_back(enc.tokenize(t));
  return out;
}

void check_reference_encoder(EncoderName name, const std::string& dir) {
  const auto ref = nlohmann::json::parse(io::read_file(kFixtures / dir / "expected.json"));
  const auto enc = TransformerEncoder::load_pretrained(EncoderIdentity::standard(name, dir),
                                                       kFixtures / dir, 64);
  CHECK(enc.parameter_count() == ref["param_count"].get<std::size_t>());
  const auto texts = ref["batch"].get<std::vector<std::string>>();
  const auto batch = tokenize_all(enc, texts);
  const auto tape = enc.forward(batch, Mode::Eval, nullptr);
  const auto pooled = ref["pooled"].get<std::vector<std::vector<double>>>();
  const auto first = ref["cls_hidden"].get<std::vector<std::vector<double>>>();
  REQUIRE(tape.pooled.rows() == pooled.size());
  for (std::size_t b = 0; b < pooled.size(); ++b) {
    for (std::size_t j = 0; j < pooled[b].size(); ++j) {
      CHECK(tape.pooled(b, j) == doctest::Approx(pooled[b][j]).epsilon(1e-5));
      CHECK(tape.first(b, j) == doctest::Approx(first[b][j]).epsilon(1e-5));
    }
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("pretrained BERT layout reproduces the reference pooled output") {
  check_reference_encoder(EncoderName::BaseGeneral, "hf_bert_tiny");
}

TEST_CASE("pretrained RoBERTa layout reproduces the reference pooled output") {
  check_reference_encoder(EncoderName::RobustGeneral, "hf_roberta_tiny");
}

TEST_CASE("tiny encoder shape and size") {
  const auto enc = TransformerEncoder::tiny_test();
  CHECK(enc.hidden_size() == 32);
  CHECK(enc.config().layers == 2);
  CHECK(enc.config().heads == 2);
  CHECK(enc.parameter_count() <= 1'000'000);
  CHECK(enc.check_parameter_count());
  const auto batch = tokenize_all(enc, {"i am so tired of everything"});
  const Matrix out = enc.encode(batch);
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 32);
}

TEST_CASE("eval mode is deterministic and train mode is stochastic") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto batch = tokenize_all(enc, {"the rent is due and i cannot sleep"});
  CHECK(enc.encode(batch) == enc.encode(batch));
  Rng rng(7, RngStream::Dropout);
  const auto a = enc.forward(batch, Mode::Train, &rng).pooled;
  const auto b = enc.forward(batch, Mode::Train, &rng).pooled;
  CHECK(max_abs_diff(a, b) > 0.0);
  CHECK_THROWS(enc.forward(batch, Mode::Train, nullptr));
}

TEST_CASE("batch of two equals two singleton calls") {
  const auto enc = TransformerEncoder::tiny_test();
  const auto batch = tokenize_all(enc, {"short one", "a much longer second sentence about exams"});
  const Matrix both = enc.encode(batch);
  for (std::size_t b = 0; b < 2; ++b) {
    const Matrix single = enc.encode(std::span(&batch[b], 1));
    for (std::size_t j = 0; j < both.cols(); ++j)
      CHECK(std::abs(both(b, j) - single(0, j)) <= 1e-5);
  }
}

TEST_CASE("export then import reproduces eval outputs bit for bit") {
  auto source = TransformerEncoder::tiny_test(11);
  auto target = TransformerEncoder::tiny_test(99);
  const auto batch = tokenize_all(source, {"hello there", "we went hiking today"});
  REQUIRE(source.encode(batch) != target.encode(batch));

  const auto ck = source.export_weights();
  CHECK(ck.fingerprint == source.fingerprint());
  CHECK(ck.compute_fingerprint() == ck.fingerprint);

  const fs::path path = fs::temp_directory_path() / "emostress_test_encoder.safetensors";
  ck.save(path);
  const auto loaded = EncoderCheckpoint::load(path);
  fs::remove(path);
  CHECK(loaded.fingerprint == ck.fingerprint);
  target.import_weights(loaded);
  CHECK(target.encode(batch) == source.encode(batch));
  CHECK(target.fingerprint() == source.fingerprint());
}

TEST_CASE("fingerprint tracks every weight change") {
  auto enc = TransformerEncoder::tiny_test();
  const auto before = enc.fingerprint();
  CHECK(TransformerEncoder::tiny_test().fingerprint() == before);
  enc.parameters().back()->value(0, 0) += 1e-12;
  CHECK(enc.fingerprint() != before);
}

TEST_CASE("import rejects a different identity or a tampered checkpoint") {
  auto enc = TransformerEncoder::tiny_test();
  auto ck = enc.export_weights();

  auto wrong = ck;
  wrong.identity.name = EncoderName::BaseGeneral;
  CHECK_THROWS_AS(enc.import_weights(wrong), std::invalid_argument);

  auto tampered = ck;
  tampered.weights.begin()->second(0, 0) += 1.0;
  CHECK_THROWS_AS(enc.import_weights(tampered), std::runtime_error);
}

TEST_CASE("backward matches finite differences with dropout active") {
  auto enc = TransformerEncoder::tiny_test(3, 32);
  const auto batch = tokenize_all(enc, {"my boss keeps yelling", "fine"});
  Rng weights_rng(5, RngStream::Sampling);
  Matrix probe(2, enc.hidden_size());
  for (double& v : probe.values()) v = weights_rng.normal(0.0, 1.0);

  const Rng dropout_seed(17, RngStream::Dropout);
  auto loss = [&](const TransformerEncoder& e) {
    Rng r = dropout_seed;
    const auto t = e.forward(batch, Mode::Train, &r);
    double s = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) s += probe.data()[i] * t.pooled.data()[i];
    return s;
  };

  enc.zero_grad();
  {
    Rng r = dropout_seed;
    const auto tape = enc.forward(batch, Mode::Train, &r);
    enc.backward(tape, probe);
  }

  Rng pick(8, RngStream::Sampling);
  const auto params = enc.parameters();
  int checked = 0;
  for (int attempt = 0; attempt < 200 && checked < 24; ++attempt) {
    Parameter* p = params[pick.below(params.size())];
    const std::size_t idx = pick.below(p->value.size());
    const double analytic = p->grad.data()[idx];
    if (std::abs(analytic) < 1e-6) continue;  // unused embedding rows etc.
    const double h = 1e-5;
    const double saved = p->value.data()[idx];
    p->value.data()[idx] = saved + h;
    const double up = loss(enc);
    p->value.data()[idx] = saved - h;
    const double down = loss(enc);
    p->value.data()[idx] = saved;
    const double numeric = (up - down) / (2 * h);
    CAPTURE(p->name);
    CHECK(std::abs(numeric - analytic) <= 1e-4 * std::max(1.0, std::abs(numeric)));
    ++checked;
  }
  CHECK(checked >= 20);
}
