// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <string>

#include <json.hpp>

#include "emostress/io/atomic_file.hpp"
#include "emostress/tokenizer.hpp"

using namespace emostress;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EMOSTRESS_FIXTURE_DIR;

nlohmann::json expected(const std::string& dir) {
  return nlohmann::json::parse(io::read_file(kFixtures / dir / "expected.json"));
}

void check_against_reference(const Tokenizer& tok, const nlohmann::json& ref) {
  const auto max_len = ref["max_len"].get<std::size_t>();
  for (const auto& row : ref["tokens"]) {
    const auto text = row["text"].get<std::string>();
    CAPTURE(text);
    const auto full = tok.tokenize(text, 100000);
    CHECK(full.ids == row["ids"].get<std::vector<int>>());
    CHECK_FALSE(full.truncated);
    const auto cut = tok.tokenize(text, max_len);
    CHECK(cut.ids == row["ids_truncated"].get<std::vector<int>>());
    CHECK(cut.truncated == (full.ids.size() > max_len));
  }
}

}  // namespace

TEST_CASE("wordpiece matches the reference BERT tokenizer") {
  WordPieceTokenizer tok(kFixtures / "hf_bert_tiny" / "vocab.txt", true);
  check_against_reference(tok, expected("hf_bert_tiny"));
}

TEST_CASE("byte-level BPE matches the reference RoBERTa tokenizer") {
  ByteBpeTokenizer tok(kFixtures / "hf_roberta_tiny" / "vocab.json",
                       kFixtures / "hf_roberta_tiny" / "merges.txt");
  check_against_reference(tok, expected("hf_roberta_tiny"));
}

TEST_CASE("empty text yields only the special tokens") {
  HashingTokenizer tok(1024);
  const auto t = tok.tokenize("", 512);
  CHECK(t.ids == std::vector<int>{tok.start_id(), tok.end_id()});
  CHECK_FALSE(t.truncated);
  CHECK(t.attention_mask == std::vector<int>{1, 1});
}

TEST_CASE("long text is capped at max length and flagged") {
  HashingTokenizer tok(1024);
  std::string text;
  while (text.size() < 10000) text += "word ";
  text.resize(10000);
  const auto t = tok.tokenize(text, 128);
  CHECK(t.length() == 128);
  CHECK(t.truncated);
  CHECK(t.ids.back() == tok.end_id());
}

TEST_CASE("tokenization is deterministic") {
  HashingTokenizer tok(1024);
  const std::string s = "I can't stop worrying about rent.";
  CHECK(tok.tokenize(s, 64) == tok.tokenize(s, 64));
  WordPieceTokenizer wp(kFixtures / "hf_bert_tiny" / "vocab.txt", true);
  CHECK(wp.tokenize(s, 64) == wp.tokenize(s, 64));
}

TEST_CASE("hashing tokenizer ids stay inside the vocabulary") {
  HashingTokenizer tok(64);
  for (int id : tok.encode_ids("Some Mixed CASE words, numbers 123 and ünïcode")) {
    CHECK(id >= 4);
    CHECK(id < 64);
  }
  CHECK(tok.encode_ids("Stress") == tok.encode_ids("stress"));
}

TEST_CASE("max length must leave room for special tokens") {
  HashingTokenizer tok(64);
  CHECK_THROWS_AS(tok.tokenize("x", 1), std::invalid_argument);
}
