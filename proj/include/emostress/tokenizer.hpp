// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emostress {

struct TokenizedInput {
  std::vector<int> ids;
  std::vector<int> attention_mask;
  bool truncated = false;

  std::size_t length() const { return ids.size(); }
  friend bool operator==(const TokenizedInput&, const TokenizedInput&) = default;
};

/// Maps text to vocabulary ids. Subclasses implement the subword scheme;
/// the base class adds the sequence-start/end tokens and truncation.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  /// Subword ids without special tokens.
  virtual std::vector<int> encode_ids(std::string_view text) const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::string kind() const = 0;

  int start_id() const { return start_id_; }
  int end_id() const { return end_id_; }
  int pad_id() const { return pad_id_; }

  /// start + ids + end, with the ids cut so the whole sequence fits in
  /// max_length. Requires max_length >= 2.
  TokenizedInput tokenize(std::string_view text, std::size_t max_length) const;

 protected:
  int start_id_ = 0;
  int end_id_ = 0;
  int pad_id_ = 0;
};

/// Word-hashing tokenizer for the tiny test encoder: lowercased alphanumeric
/// runs hashed into a fixed vocabulary. Ids 0..3 are pad/start/end/unk.
class HashingTokenizer final : public Tokenizer {
 public:
  explicit HashingTokenizer(std::size_t vocab_size);
  std::vector<int> encode_ids(std::string_view text) const override;
  std::size_t vocab_size() const override { return vocab_size_; }
  std::string kind() const override { return "hashing"; }

 private:
  std::size_t vocab_size_;
};

/// BERT-style tokenizer: basic cleanup and punctuation splitting (optionally
/// lowercasing and stripping accents) followed by greedy longest-match
/// WordPiece over vocab.txt.
class WordPieceTokenizer final : public Tokenizer {
 public:
  WordPieceTokenizer(const std::filesystem::path& vocab_file, bool lowercase);
  std::vector<int> encode_ids(std::string_view text) const override;
  std::size_t vocab_size() const override { return vocab_.size(); }
  std::string kind() const override { return "wordpiece"; }

  /// Whitespace/punctuation pre-tokenization (exposed for tests).
  std::vector<std::string> basic_tokenize(std::string_view text) const;

 private:
  void wordpiece(const std::string& word, std::vector<int>& out) const;

  std::unordered_map<std::string, int> vocab_;
  bool lowercase_;
  int unk_id_;
};

/// GPT-2/RoBERTa byte-level BPE over vocab.json + merges.txt.
class ByteBpeTokenizer final : public Tokenizer {
 public:
  ByteBpeTokenizer(const std::filesystem::path& vocab_json, const std::filesystem::path& merges);
  ~ByteBpeTokenizer() override;
  std::vector<int> encode_ids(std::string_view text) const override;
  std::size_t vocab_size() const override { return vocab_.size(); }
  std::string kind() const override { return "byte-bpe"; }

  std::vector<std::string> pretokenize(std::string_view text) const;

 private:
  std::vector<std::string> bpe(const std::string& mapped) const;

  std::unordered_map<std::string, int> vocab_;
  std::map<std::pair<std::string, std::string>, std::size_t> merge_rank_;
  std::vector<std::string> byte_symbol_;  // byte value -> mapped UTF-8 symbol
  struct Pattern;
  std::unique_ptr<Pattern> pattern_;
  int unk_id_;
};

}  // namespace emostress
