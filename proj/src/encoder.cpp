// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/encoder.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/core/hash.hpp"
#include "emostress/io/atomic_file.hpp"
#include "emostress/io/safetensors.hpp"
#include "emostress/kernels/kernels.hpp"

namespace emostress {

using nlohmann::json;

namespace {

constexpr std::size_t kTinyVocab = 1024;

void add_inplace(Matrix& dst, const Matrix& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

Matrix masked(const Matrix& x, const Matrix& mask) {
  Matrix out = x;
  apply_mask(out, mask);
  return out;
}

std::string canonical_weight_name(std::string name) {
  for (std::string_view prefix : {"bert.", "roberta.", "model."}) {
    if (name.rfind(prefix, 0) == 0) {
      name.erase(0, prefix.size());
      break;
    }
  }
  auto replace_suffix = [&](std::string_view from, std::string_view to) {
    if (name.size() >= from.size() && name.compare(name.size() - from.size(), from.size(), from) == 0)
      name.replace(name.size() - from.size(), from.size(), to);
  };
  replace_suffix(".gamma", ".weight");
  replace_suffix(".beta", ".bias");
  return name;
}

json config_to_json(const TransformerConfig& c) {
  return json{{"vocab_size", c.vocab_size},       {"hidden", c.hidden},
              {"layers", c.layers},               {"heads", c.heads},
              {"intermediate", c.intermediate},   {"max_positions", c.max_positions},
              {"type_vocab", c.type_vocab},       {"position_offset", c.position_offset},
              {"layer_norm_eps", c.layer_norm_eps}, {"hidden_dropout", c.hidden_dropout},
              {"attention_dropout", c.attention_dropout}};
}

TransformerConfig config_from_json(const json& j) {
  TransformerConfig c;
  c.vocab_size = j.at("vocab_size");
  c.hidden = j.at("hidden");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.intermediate = j.at("intermediate");
  c.max_positions = j.at("max_positions");
  c.type_vocab = j.at("type_vocab");
  c.position_offset = j.at("position_offset");
  c.layer_norm_eps = j.at("layer_norm_eps");
  c.hidden_dropout = j.at("hidden_dropout");
  c.attention_dropout = j.at("attention_dropout");
  return c;
}

}  // namespace

std::vector<std::string> parameter_names(const TransformerConfig& c) {
  std::vector<std::string> names = {
      "embeddings.word_embeddings.weight", "embeddings.position_embeddings.weight",
      "embeddings.token_type_embeddings.weight", "embeddings.LayerNorm.weight",
      "embeddings.LayerNorm.bias"};
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    for (const char* part : {"attention.self.query", "attention.self.key", "attention.self.value",
                             "attention.output.dense", "attention.output.LayerNorm",
                             "intermediate.dense", "output.dense", "output.LayerNorm"}) {
      names.push_back(p + part + ".weight");
      names.push_back(p + part + ".bias");
    }
  }
  names.push_back("pooler.dense.weight");
  names.push_back("pooler.dense.bias");
  return names;
}

std::string_view to_string(EncoderName name) {
  switch (name) {
    case EncoderName::BaseGeneral: return "BASE_GENERAL";
    case EncoderName::RobustGeneral: return "ROBUST_GENERAL";
    case EncoderName::BaseMental: return "BASE_MENTAL";
    case EncoderName::RobustMental: return "ROBUST_MENTAL";
    case EncoderName::TinyTest: return "TINY_TEST";
  }
  throw std::invalid_argument("bad encoder name");
}

std::string_view display_name(EncoderName name) {
  switch (name) {
    case EncoderName::BaseGeneral: return "BERT";
    case EncoderName::RobustGeneral: return "RoBERTa";
    case EncoderName::BaseMental: return "MentalBERT";
    case EncoderName::RobustMental: return "MentalRoBERTa";
    case EncoderName::TinyTest: return "Tiny";
  }
  throw std::invalid_argument("bad encoder name");
}

EncoderName encoder_from_string(std::string_view s) {
  for (EncoderName n : {EncoderName::BaseGeneral, EncoderName::RobustGeneral,
                        EncoderName::BaseMental, EncoderName::RobustMental, EncoderName::TinyTest}) {
    if (s == to_string(n) || s == display_name(n)) return n;
  }
  throw std::invalid_argument("unknown encoder '" + std::string(s) + "'");
}

EncoderFamily family_of(EncoderName name) {
  switch (name) {
    case EncoderName::BaseGeneral:
    case EncoderName::BaseMental: return EncoderFamily::Bert;
    case EncoderName::RobustGeneral:
    case EncoderName::RobustMental: return EncoderFamily::Roberta;
    case EncoderName::TinyTest: return EncoderFamily::Tiny;
  }
  throw std::invalid_argument("bad encoder name");
}

EncoderIdentity EncoderIdentity::standard(EncoderName name, std::string asset_ref) {
  EncoderIdentity id;
  id.name = name;
  id.asset_ref = std::move(asset_ref);
  switch (family_of(name)) {
    case EncoderFamily::Bert: id.expected_params = 110'000'000; break;
    case EncoderFamily::Roberta: id.expected_params = 125'000'000; break;
    case EncoderFamily::Tiny: id.expected_params = 0; break;  // filled from the config
  }
  return id;
}

TransformerConfig TransformerConfig::tiny_test() {
  TransformerConfig c;
  c.vocab_size = kTinyVocab;
  c.hidden = 32;
  c.layers = 2;
  c.heads = 2;
  c.intermediate = 64;
  c.max_positions = 128;
  c.type_vocab = 2;
  c.layer_norm_eps = 1e-12;
  return c;
}

TransformerConfig config_from_hf_json(std::string_view json_text, EncoderFamily family) {
  const json j = json::parse(json_text);
  if (j.contains("hidden_act") && j["hidden_act"] != "gelu")
    throw std::runtime_error("unsupported activation " + j["hidden_act"].dump());
  TransformerConfig c;
  c.vocab_size = j.at("vocab_size");
  c.hidden = j.at("hidden_size");
  c.layers = j.at("num_hidden_layers");
  c.heads = j.at("num_attention_heads");
  c.intermediate = j.at("intermediate_size");
  c.max_positions = j.at("max_position_embeddings");
  c.type_vocab = j.value("type_vocab_size", std::size_t{2});
  c.layer_norm_eps = j.value("layer_norm_eps", 1e-12);
  c.hidden_dropout = j.value("hidden_dropout_prob", 0.1);
  c.attention_dropout = j.value("attention_probs_dropout_prob", 0.1);
  if (family == EncoderFamily::Roberta)
    c.position_offset = j.value("pad_token_id", std::size_t{1}) + 1;
  return c;
}

TransformerEncoder::TransformerEncoder(EncoderIdentity identity, TransformerConfig config,
                                       std::shared_ptr<const Tokenizer> tokenizer,
                                       std::size_t max_length)
    : identity_(std::move(identity)),
      config_(config),
      tokenizer_(std::move(tokenizer)),
      max_length_(max_length) {
  if (!tokenizer_) throw std::invalid_argument("encoder needs a tokenizer");
  if (config_.hidden == 0 || config_.heads == 0 || config_.hidden % config_.heads != 0)
    throw std::invalid_argument("hidden width must be a positive multiple of the head count");
  if (config_.max_positions <= config_.position_offset)
    throw std::invalid_argument("no usable positions");
  const std::size_t cap = config_.max_positions - config_.position_offset;
  if (max_length_ < 2) throw std::invalid_argument("max length must be at least 2");
  if (max_length_ > cap) {
    spdlog::warn("max length {} exceeds the encoder's {} positions; clamping", max_length_, cap);
    max_length_ = cap;
  }
  if (tokenizer_->vocab_size() > config_.vocab_size)
    throw std::invalid_argument("tokenizer vocabulary larger than the embedding table");
  build();
}

void TransformerEncoder::build() {
  const auto& c = config_;
  word_embeddings_ = Parameter("embeddings.word_embeddings.weight", c.vocab_size, c.hidden);
  position_embeddings_ =
      Parameter("embeddings.position_embeddings.weight", c.max_positions, c.hidden);
  token_type_embeddings_ =
      Parameter("embeddings.token_type_embeddings.weight", c.type_vocab, c.hidden);
  embedding_norm_ = LayerNorm("embeddings.LayerNorm", c.hidden, c.layer_norm_eps);
  layers_.clear();
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    layers_.push_back(Layer{
        Linear(p + "attention.self.query", c.hidden, c.hidden),
        Linear(p + "attention.self.key", c.hidden, c.hidden),
        Linear(p + "attention.self.value", c.hidden, c.hidden),
        Linear(p + "attention.output.dense", c.hidden, c.hidden),
        LayerNorm(p + "attention.output.LayerNorm", c.hidden, c.layer_norm_eps),
        Linear(p + "intermediate.dense", c.hidden, c.intermediate),
        Linear(p + "output.dense", c.intermediate, c.hidden),
        LayerNorm(p + "output.LayerNorm", c.hidden, c.layer_norm_eps),
    });
  }
  pooler_ = Linear("pooler.dense", c.hidden, c.hidden);
}

TransformerEncoder TransformerEncoder::tiny_test(std::uint64_t init_seed, std::size_t max_length) {
  auto identity = EncoderIdentity::standard(EncoderName::TinyTest, "builtin:tiny");
  TransformerEncoder enc(identity, TransformerConfig::tiny_test(),
                         std::make_shared<HashingTokenizer>(kTinyVocab), max_length);
  enc.identity_.expected_params = enc.parameter_count();
  Rng rng(init_seed, RngStream::Init);
  enc.init_random(rng);
  return enc;
}

TransformerEncoder TransformerEncoder::load_pretrained(const EncoderIdentity& identity,
                                                       const std::filesystem::path& asset_dir,
                                                       std::size_t max_length) {
  namespace fs = std::filesystem;
  const EncoderFamily family = family_of(identity.name);
  if (family == EncoderFamily::Tiny)
    throw std::invalid_argument("TINY_TEST has no pretrained assets");
  if (!fs::is_directory(asset_dir))
    throw std::runtime_error("encoder assets not found: " + asset_dir.string() +
                             " (weights are never downloaded; point encoder.asset_ref at a "
                             "local directory)");
  const TransformerConfig config =
      config_from_hf_json(io::read_file(asset_dir / "config.json"), family);

  std::shared_ptr<const Tokenizer> tokenizer;
  if (family == EncoderFamily::Bert) {
    bool lowercase = true;
    if (fs::exists(asset_dir / "tokenizer_config.json")) {
      const json tc = json::parse(io::read_file(asset_dir / "tokenizer_config.json"));
      lowercase = tc.value("do_lower_case", true);
    }
    tokenizer = std::make_shared<WordPieceTokenizer>(asset_dir / "vocab.txt", lowercase);
  } else {
    tokenizer =
        std::make_shared<ByteBpeTokenizer>(asset_dir / "vocab.json", asset_dir / "merges.txt");
  }

  TransformerEncoder enc(identity, config, std::move(tokenizer), max_length);
  io::TensorFile file = io::read_safetensors(asset_dir / "model.safetensors");
  std::map<std::string, const io::Tensor*> by_name;
  for (const auto& [name, tensor] : file.tensors) by_name[canonical_weight_name(name)] = &tensor;

  Rng fallback(0, RngStream::Init);
  for (Parameter* p : enc.parameters()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      if (p->name.rfind("pooler.", 0) == 0) {
        spdlog::warn("{}: checkpoint has no {}; using random init", asset_dir.string(), p->name);
        if (p->name.ends_with(".weight"))
          for (double& w : p->value.values()) w = fallback.normal(0.0, 0.02);
        continue;
      }
      throw std::runtime_error(asset_dir.string() + ": missing weight " + p->name);
    }
    const io::Tensor& t = *it->second;
    if (t.element_count() != p->value.size())
      throw std::runtime_error(p->name + ": shape mismatch with config");
    std::copy(t.values.begin(), t.values.end(), p->value.data());
  }
  enc.check_parameter_count();
  return enc;
}

TokenizedInput TransformerEncoder::tokenize(std::string_view text) const {
  return tokenizer_->tokenize(text, max_length_);
}

TransformerEncoder::Tape TransformerEncoder::forward(std::span<const TokenizedInput> batch,
                                                     Mode mode, Rng* dropout_rng) const {
  if (batch.empty()) throw std::invalid_argument("empty encoder batch");
  if (mode == Mode::Train && dropout_rng == nullptr)
    throw std::invalid_argument("train mode needs a dropout generator");
  Rng* drop = mode == Mode::Train ? dropout_rng : nullptr;
  const auto& c = config_;
  const std::size_t H = c.hidden;

  Tape t;
  t.offsets.push_back(0);
  for (const auto& in : batch) {
    if (in.ids.empty()) throw std::invalid_argument("empty token sequence");
    if (in.ids.size() > max_length_)
      throw std::invalid_argument("token sequence longer than the encoder's max length");
    for (std::size_t i = 0; i < in.ids.size(); ++i) {
      const int id = in.ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= c.vocab_size)
        throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
      t.ids.push_back(id);
      t.positions.push_back(i + c.position_offset);
    }
    t.offsets.push_back(t.ids.size());
  }
  const std::size_t N = t.ids.size();
  const std::size_t B = batch.size();

  t.embedding_sum.resize(N, H);
  for (std::size_t i = 0; i < N; ++i) {
    auto out = t.embedding_sum.row(i);
    auto w = word_embeddings_.value.row(static_cast<std::size_t>(t.ids[i]));
    auto p = position_embeddings_.value.row(t.positions[i]);
    auto tt = token_type_embeddings_.value.row(0);
    for (std::size_t j = 0; j < H; ++j) out[j] = w[j] + p[j] + tt[j];
  }
  Matrix x;
  embedding_norm_.forward(t.embedding_sum, x, t.embedding_ln);
  t.embedding_drop = make_dropout_mask(N, H, c.hidden_dropout, drop);
  apply_mask(x, t.embedding_drop);

  t.layers.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    LayerTape& lt = t.layers[l];
    lt.input = std::move(x);
    layer.query.forward(lt.input, lt.q);
    layer.key.forward(lt.input, lt.k);
    layer.value.forward(lt.input, lt.v);
    if (drop != nullptr && c.attention_dropout > 0.0) {
      lt.attention_masks.reserve(B * c.heads);
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t T = t.offsets[b + 1] - t.offsets[b];
        for (std::size_t h = 0; h < c.heads; ++h)
          lt.attention_masks.push_back(make_dropout_mask(T, T, c.attention_dropout, drop));
      }
    }
    kernels::attention_forward(lt.q, lt.k, lt.v, t.offsets, c.heads, lt.probs, lt.attention_masks,
                               lt.context);
    Matrix attn;
    layer.attention_out.forward(lt.context, attn);
    lt.attention_drop = make_dropout_mask(N, H, c.hidden_dropout, drop);
    apply_mask(attn, lt.attention_drop);
    add_inplace(attn, lt.input);
    lt.resid1 = std::move(attn);
    layer.attention_norm.forward(lt.resid1, lt.h1, lt.ln1);

    layer.intermediate.forward(lt.h1, lt.inter_pre);
    kernels::gelu_forward(lt.inter_pre, lt.inter_act);
    Matrix ffn;
    layer.output.forward(lt.inter_act, ffn);
    lt.ffn_drop = make_dropout_mask(N, H, c.hidden_dropout, drop);
    apply_mask(ffn, lt.ffn_drop);
    add_inplace(ffn, lt.h1);
    lt.resid2 = std::move(ffn);
    layer.output_norm.forward(lt.resid2, x, lt.ln2);
  }
  t.hidden = std::move(x);

  t.first.resize(B, H);
  for (std::size_t b = 0; b < B; ++b) {
    auto src = t.hidden.row(t.offsets[b]);
    std::copy(src.begin(), src.end(), t.first.row(b).begin());
  }
  pooler_.forward(t.first, t.pooled);
  for (double& v : t.pooled.values()) v = std::tanh(v);
  return t;
}

void TransformerEncoder::backward(const Tape& t, const Matrix& dpooled) {
  const auto& c = config_;
  const std::size_t H = c.hidden;
  const std::size_t N = t.ids.size();
  const std::size_t B = t.offsets.size() - 1;
  if (dpooled.rows() != B || dpooled.cols() != H)
    throw std::invalid_argument("pooled gradient shape does not match the tape");

  Matrix dz = dpooled;
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const double y = t.pooled.data()[i];
    dz.data()[i] *= 1.0 - y * y;
  }
  Matrix dfirst;
  pooler_.backward(t.first, dz, &dfirst);
  Matrix dout(N, H);
  for (std::size_t b = 0; b < B; ++b) {
    auto src = dfirst.row(b);
    std::copy(src.begin(), src.end(), dout.row(t.offsets[b]).begin());
  }

  Matrix tmp;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Layer& layer = layers_[l];
    const LayerTape& lt = t.layers[l];

    Matrix dresid2;
    layer.output_norm.backward(lt.resid2, dout, lt.ln2, dresid2);
    Matrix dh1 = dresid2;
    Matrix dinter_act;
    layer.output.backward(lt.inter_act, masked(dresid2, lt.ffn_drop), &dinter_act);
    Matrix dinter_pre;
    kernels::gelu_backward(lt.inter_pre, dinter_act, dinter_pre);
    layer.intermediate.backward(lt.h1, dinter_pre, &tmp);
    add_inplace(dh1, tmp);

    Matrix dresid1;
    layer.attention_norm.backward(lt.resid1, dh1, lt.ln1, dresid1);
    Matrix dx = dresid1;
    Matrix dcontext;
    layer.attention_out.backward(lt.context, masked(dresid1, lt.attention_drop), &dcontext);
    Matrix dq, dk, dv;
    kernels::attention_backward(lt.q, lt.k, lt.v, t.offsets, c.heads, lt.probs,
                                lt.attention_masks, dcontext, dq, dk, dv);
    layer.query.backward(lt.input, dq, &tmp);
    add_inplace(dx, tmp);
    layer.key.backward(lt.input, dk, &tmp);
    add_inplace(dx, tmp);
    layer.value.backward(lt.input, dv, &tmp);
    add_inplace(dx, tmp);
    dout = std::move(dx);
  }

  apply_mask(dout, t.embedding_drop);
  Matrix dsum;
  embedding_norm_.backward(t.embedding_sum, dout, t.embedding_ln, dsum);
  for (std::size_t i = 0; i < N; ++i) {
    auto g = dsum.row(i);
    auto w = word_embeddings_.grad.row(static_cast<std::size_t>(t.ids[i]));
    auto p = position_embeddings_.grad.row(t.positions[i]);
    auto tt = token_type_embeddings_.grad.row(0);
    for (std::size_t j = 0; j < H; ++j) {
      w[j] += g[j];
      p[j] += g[j];
      tt[j] += g[j];
    }
  }
}

Matrix TransformerEncoder::encode(std::span<const TokenizedInput> batch) const {
  return forward(batch, Mode::Eval, nullptr).pooled;
}

ParameterList TransformerEncoder::parameters() {
  ParameterList out{&word_embeddings_, &position_embeddings_, &token_type_embeddings_};
  embedding_norm_.collect(out);
  for (Layer& l : layers_) {
    l.query.collect(out);
    l.key.collect(out);
    l.value.collect(out);
    l.attention_out.collect(out);
    l.attention_norm.collect(out);
    l.intermediate.collect(out);
    l.output.collect(out);
    l.output_norm.collect(out);
  }
  pooler_.collect(out);
  return out;
}

ConstParameterList TransformerEncoder::parameters() const {
  ParameterList mutable_list = const_cast<TransformerEncoder*>(this)->parameters();
  return ConstParameterList(mutable_list.begin(), mutable_list.end());
}

std::string TransformerEncoder::fingerprint() const { return emostress::fingerprint(parameters()); }

std::size_t TransformerEncoder::parameter_count() const { return element_count(parameters()); }

void TransformerEncoder::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

void TransformerEncoder::init_random(Rng& rng, double stddev) {
  for (Parameter* p : {&word_embeddings_, &position_embeddings_, &token_type_embeddings_})
    for (double& w : p->value.values()) w = rng.normal(0.0, stddev);
  const auto pad = static_cast<std::size_t>(tokenizer_->pad_id());
  if (pad < config_.vocab_size)
    for (double& w : word_embeddings_.value.row(pad)) w = 0.0;
  embedding_norm_.reset();
  for (Layer& l : layers_) {
    for (Linear* lin : {&l.query, &l.key, &l.value, &l.attention_out, &l.intermediate, &l.output})
      lin->init_normal(rng, stddev);
    l.attention_norm.reset();
    l.output_norm.reset();
  }
  pooler_.init_normal(rng, stddev);
}

bool TransformerEncoder::check_parameter_count() const {
  const std::size_t expected = identity_.expected_params;
  if (expected == 0) return true;
  const std::size_t observed = parameter_count();
  const double rel =
      std::abs(static_cast<double>(observed) - static_cast<double>(expected)) / expected;
  if (rel > 0.02) {
    spdlog::warn("{}: {} parameters, expected about {} ({:.1f}% off)", to_string(identity_.name),
                 observed, expected, rel * 100.0);
    return false;
  }
  return true;
}

EncoderCheckpoint TransformerEncoder::export_weights() const {
  EncoderCheckpoint ck;
  ck.identity = identity_;
  ck.config = config_;
  for (const Parameter* p : parameters()) ck.weights[p->name] = p->value;
  ck.fingerprint = fingerprint();
  return ck;
}

void TransformerEncoder::import_weights(const EncoderCheckpoint& ck) {
  if (ck.identity.name != identity_.name)
    throw std::invalid_argument(std::string("checkpoint is for ") +
                                std::string(to_string(ck.identity.name)) + ", not " +
                                std::string(to_string(identity_.name)));
  if (!(ck.config == config_))
    throw std::invalid_argument("checkpoint architecture differs from this encoder");
  if (ck.compute_fingerprint() != ck.fingerprint)
    throw std::runtime_error("checkpoint fingerprint mismatch (weights altered or corrupt)");
  for (Parameter* p : parameters()) {
    auto it = ck.weights.find(p->name);
    if (it == ck.weights.end()) throw std::runtime_error("checkpoint lacks " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw std::runtime_error(p->name + ": shape mismatch");
    p->value = it->second;
  }
}

std::filesystem::path resolve_asset_dir(const std::string& asset_ref,
                                        const std::filesystem::path& cache_dir) {
  namespace fs = std::filesystem;
  if (asset_ref.empty()) throw std::invalid_argument("encoder.asset_ref is empty");
  if (fs::is_directory(asset_ref)) return asset_ref;
  fs::path root = cache_dir;
  if (root.empty()) {
    if (const char* env = std::getenv(kAssetCacheEnv)) root = env;
  }
  if (!root.empty() && fs::is_directory(root / asset_ref)) return root / asset_ref;
  throw std::runtime_error("encoder assets '" + asset_ref + "' not found" +
                           (root.empty() ? std::string(" (set ") + kAssetCacheEnv + ")"
                                         : " under " + root.string()));
}

TransformerEncoder make_encoder(const EncoderIdentity& identity, std::size_t max_length,
                                const std::filesystem::path& cache_dir, std::uint64_t tiny_seed) {
  if (identity.name == EncoderName::TinyTest) return TransformerEncoder::tiny_test(tiny_seed, max_length);
  return TransformerEncoder::load_pretrained(identity, resolve_asset_dir(identity.asset_ref, cache_dir),
                                             max_length);
}

std::string EncoderCheckpoint::compute_fingerprint() const {
  // Hash in encoder parameter order, not map order, so it equals the live
  // encoder's fingerprint.
  Sha256 h;
  for (const std::string& name : parameter_names(config)) {
    auto it = weights.find(name);
    if (it == weights.end()) throw std::runtime_error("checkpoint lacks " + name);
    hash_parameter(h, name, it->second);
  }
  return h.hex();
}

void EncoderCheckpoint::save(const std::filesystem::path& path) const {
  io::TensorFile file;
  for (const auto& [name, m] : weights)
    file.tensors[name] = io::Tensor{{m.rows(), m.cols()}, {m.values().begin(), m.values().end()}};
  file.metadata["format"] = "emostress-encoder";
  file.metadata["encoder.name"] = std::string(to_string(identity.name));
  file.metadata["encoder.asset_ref"] = identity.asset_ref;
  file.metadata["encoder.expected_params"] = std::to_string(identity.expected_params);
  file.metadata["config"] = config_to_json(config).dump();
  file.metadata["fingerprint"] = fingerprint;
  io::write_safetensors(path, file);
}

EncoderCheckpoint EncoderCheckpoint::load(const std::filesystem::path& path) {
  const io::TensorFile file = io::read_safetensors(path);
  auto meta = [&](const std::string& key) -> const std::string& {
    auto it = file.metadata.find(key);
    if (it == file.metadata.end())
      throw std::runtime_error(path.string() + ": not an encoder checkpoint (no " + key + ")");
    return it->second;
  };
  if (meta("format") != "emostress-encoder")
    throw std::runtime_error(path.string() + ": not an encoder checkpoint");
  EncoderCheckpoint ck;
  ck.identity.name = encoder_from_string(meta("encoder.name"));
  ck.identity.asset_ref = meta("encoder.asset_ref");
  ck.identity.expected_params = std::stoull(meta("encoder.expected_params"));
  ck.config = config_from_json(json::parse(meta("config")));
  ck.fingerprint = meta("fingerprint");
  for (const auto& [name, t] : file.tensors) {
    if (t.shape.size() != 2) throw std::runtime_error(name + ": expected a 2-d tensor");
    Matrix m(t.shape[0], t.shape[1]);
    std::copy(t.values.begin(), t.values.end(), m.data());
    ck.weights[name] = std::move(m);
  }
  return ck;
}

}  // namespace emostress
