// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emostress/core/matrix.hpp"
#include "emostress/core/rng.hpp"
#include "emostress/nn.hpp"
#include "emostress/tokenizer.hpp"

namespace emostress {

/// The four pretrained encoders studied plus a tiny random encoder that
/// keeps the test suite fast. BASE_* are BERT-style (WordPiece), ROBUST_*
/// RoBERTa-style (byte-level BPE).
enum class EncoderName { BaseGeneral, RobustGeneral, BaseMental, RobustMental, TinyTest };

inline constexpr std::array<EncoderName, 4> kStudyEncoders = {
    EncoderName::BaseGeneral, EncoderName::RobustGeneral, EncoderName::BaseMental,
    EncoderName::RobustMental};

std::string_view to_string(EncoderName name);      // "BASE_GENERAL", ...
std::string_view display_name(EncoderName name);   // "BERT", "RoBERTa", ...
EncoderName encoder_from_string(std::string_view s);

enum class EncoderFamily { Bert, Roberta, Tiny };
EncoderFamily family_of(EncoderName name);

struct EncoderIdentity {
  EncoderName name = EncoderName::TinyTest;
  std::string asset_ref;             // user-configured path/identifier of the weights
  std::size_t expected_params = 0;   // 110M for BASE_*, 125M for ROBUST_*

  static EncoderIdentity standard(EncoderName name, std::string asset_ref = {});
  friend bool operator==(const EncoderIdentity&, const EncoderIdentity&) = default;
};

struct TransformerConfig {
  std::size_t vocab_size = 1024;
  std::size_t hidden = 32;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t intermediate = 64;
  std::size_t max_positions = 128;
  std::size_t type_vocab = 2;
  std::size_t position_offset = 0;  // RoBERTa numbers positions from pad_id + 1
  double layer_norm_eps = 1e-12;
  double hidden_dropout = 0.1;
  double attention_dropout = 0.1;

  /// 2 layers, hidden width 32, 2 attention heads.
  static TransformerConfig tiny_test();
  friend bool operator==(const TransformerConfig&, const TransformerConfig&) = default;
};

enum class Mode { Eval, Train };

struct EncoderCheckpoint;

/// Post-layer-norm transformer encoder (BERT/RoBERTa layout) with a tanh
/// pooler over the first token. Sequences are packed without padding, so a
/// batch produces exactly the same per-sequence outputs as singleton calls.
class TransformerEncoder {
 public:
  struct LayerTape {
    Matrix input, q, k, v, context;
    std::vector<Matrix> probs, attention_masks;
    Matrix attention_drop, resid1, h1, inter_pre, inter_act, ffn_drop, resid2;
    LayerNorm::Cache ln1, ln2;
  };

  /// Everything backward() needs from a forward pass.
  struct Tape {
    std::vector<std::size_t> offsets;
    std::vector<int> ids;
    std::vector<std::size_t> positions;
    Matrix embedding_sum, embedding_drop;
    LayerNorm::Cache embedding_ln;
    std::vector<LayerTape> layers;
    Matrix hidden;  // final token states, N x H
    Matrix first;   // first-token states, B x H
    Matrix pooled;  // tanh(dense(first)), B x H
  };

  TransformerEncoder(EncoderIdentity identity, TransformerConfig config,
                     std::shared_ptr<const Tokenizer> tokenizer, std::size_t max_length);

  static constexpr std::uint64_t kTinyInitSeed = 20240229;
  static TransformerEncoder tiny_test(std::uint64_t init_seed = kTinyInitSeed,
                                      std::size_t max_length = 128);

  /// Loads config.json, model.safetensors and tokenizer files from an asset
  /// directory. Never downloads anything.
  static TransformerEncoder load_pretrained(const EncoderIdentity& identity,
                                            const std::filesystem::path& asset_dir,
                                            std::size_t max_length = 512);

  const EncoderIdentity& identity() const { return identity_; }
  const TransformerConfig& config() const { return config_; }
  std::size_t hidden_size() const { return config_.hidden; }
  std::size_t max_length() const { return max_length_; }
  const Tokenizer& tokenizer() const { return *tokenizer_; }
  std::shared_ptr<const Tokenizer> shared_tokenizer() const { return tokenizer_; }

  TokenizedInput tokenize(std::string_view text) const;

  /// Train mode applies dropout drawn from `dropout_rng` (required then).
  Tape forward(std::span<const TokenizedInput> batch, Mode mode, Rng* dropout_rng) const;
  /// Accumulates parameter gradients for d(loss)/d(pooled).
  void backward(const Tape& tape, const Matrix& dpooled);
  /// Eval-mode pooled representation, one row per input.
  Matrix encode(std::span<const TokenizedInput> batch) const;

  ParameterList parameters();
  ConstParameterList parameters() const;
  std::string fingerprint() const;
  std::size_t parameter_count() const;
  void zero_grad();
  void init_random(Rng& rng, double stddev = 0.02);

  /// Warns (and returns false) when the observed parameter count is more
  /// than 2% away from the identity's expected count.
  bool check_parameter_count() const;

  EncoderCheckpoint export_weights() const;
  /// Throws on identity/config mismatch or when the checkpoint's weights do
  /// not hash to its recorded fingerprint.
  void import_weights(const EncoderCheckpoint& checkpoint);

 private:
  struct Layer {
    Linear query, key, value, attention_out;
    LayerNorm attention_norm;
    Linear intermediate, output;
    LayerNorm output_norm;
  };

  void build();

  EncoderIdentity identity_;
  TransformerConfig config_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::size_t max_length_;

  Parameter word_embeddings_, position_embeddings_, token_type_embeddings_;
  LayerNorm embedding_norm_;
  std::vector<Layer> layers_;
  Linear pooler_;
};

/// Serialized encoder weights used to transfer an encoder between models.
struct EncoderCheckpoint {
  EncoderIdentity identity;
  TransformerConfig config;
  std::string fingerprint;
  std::map<std::string, Matrix> weights;

  /// Recomputes the fingerprint from `weights` (parameter order).
  std::string compute_fingerprint() const;
  void save(const std::filesystem::path& path) const;
  static EncoderCheckpoint load(const std::filesystem::path& path);
};

/// Environment variable naming the directory that holds encoder assets.
inline constexpr const char* kAssetCacheEnv = "EMOSTRESS_ASSET_CACHE";

/// Resolves an asset reference: an existing directory is used as is,
/// otherwise it is looked up under `cache_dir` (or $EMOSTRESS_ASSET_CACHE
/// when `cache_dir` is empty). Throws when nothing matches.
std::filesystem::path resolve_asset_dir(const std::string& asset_ref,
                                        const std::filesystem::path& cache_dir = {});

/// Builds the encoder an identity names: the tiny random encoder for
/// TINY_TEST, pretrained assets otherwise.
TransformerEncoder make_encoder(const EncoderIdentity& identity, std::size_t max_length,
                                const std::filesystem::path& cache_dir = {},
                                std::uint64_t tiny_seed = TransformerEncoder::kTinyInitSeed);

/// Parameter names in the order parameters() returns them.
std::vector<std::string> parameter_names(const TransformerConfig& config);

/// HuggingFace config.json -> TransformerConfig.
TransformerConfig config_from_hf_json(std::string_view json_text, EncoderFamily family);

}  // namespace emostress
