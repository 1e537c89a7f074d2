// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/runconfig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "emostress/io/atomic_file.hpp"

namespace emostress {

namespace {

using json = nlohmann::ordered_json;

/// Walks one JSON object, remembering which keys were read, so leftovers
/// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ConfigError(path(key) + ": required");
    return *v;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) out = get<T>(key, *v);
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const json* v = find(key)) out = get<T>(key, *v);
  }

  template <typename T>
  T get(const std::string& key, const json& v) const {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown key");
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

EmotionLabelFormat format_from_string(const std::string& s, const std::string& where) {
  if (s == "names") return EmotionLabelFormat::Names;
  if (s == "indices") return EmotionLabelFormat::Indices;
  if (s == "indicators") return EmotionLabelFormat::Indicators;
  throw ConfigError(where + ": expected names, indices or indicators");
}

std::string_view to_string(EmotionLabelFormat f) {
  switch (f) {
    case EmotionLabelFormat::Names: return "names";
    case EmotionLabelFormat::Indices: return "indices";
    case EmotionLabelFormat::Indicators: return "indicators";
  }
  return "names";
}

char single_char(const std::string& s, const std::string& where) {
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw ConfigError(where + ": expected a single character");
  return s[0];
}

CorpusConfig parse_corpus(const json& j, const std::string& where, SplitCounts default_split) {
  ObjectReader r(j, where);
  CorpusConfig c;
  c.path = r.get<std::string>("path", r.require("path"));
  c.split = default_split;
  r.read("text_col", c.schema.text_col);
  r.read("label_col", c.schema.label_col);
  r.read("id_col", c.schema.id_col);
  if (const json* v = r.find("delimiter"))
    c.schema.delimiter = single_char(r.get<std::string>("delimiter", *v), r.path("delimiter"));
  if (const json* v = r.find("label_separator"))
    c.schema.label_separator = single_char(r.get<std::string>("label_separator", *v), r.path("label_separator"));
  if (const json* v = r.find("label_format"))
    c.schema.emotion_format = format_from_string(r.get<std::string>("label_format", *v), r.path("label_format"));
  if (const json* v = r.find("split")) {
    const auto counts = r.get<std::vector<std::size_t>>("split", *v);
    if (counts.size() != 3) throw ConfigError(r.path("split") + ": expected [train, dev, test]");
    c.split = {counts[0], counts[1], counts[2]};
  }
  r.finish();
  return c;
}

json corpus_json(const CorpusConfig& c) {
  json j = {{"path", c.path.string()},
            {"text_col", c.schema.text_col},
            {"label_col", c.schema.label_col},
            {"id_col", c.schema.id_col ? json(*c.schema.id_col) : json(nullptr)},
            {"delimiter", std::string(1, c.schema.delimiter)},
            {"label_separator", std::string(1, c.schema.label_separator)},
            {"label_format", to_string(c.schema.emotion_format)},
            {"split", {c.split.train, c.split.dev, c.split.test}}};
  return j;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ObjectReader r(root, "");
  RunConfig c;

  std::filesystem::path workspace = r.get<std::string>("workspace", r.require("workspace"));
  c.workspace = workspace.is_absolute() ? workspace : std::filesystem::absolute(base_dir / workspace);
  c.workspace = c.workspace.lexically_normal();
  if (!c.workspace.has_filename() && c.workspace.has_relative_path()) c.workspace = c.workspace.parent_path();
  if (const json* v = r.find("output_dir")) c.output_dir = r.get<std::string>("output_dir", *v);
  if (const json* v = r.find("asset_cache")) c.asset_cache = r.get<std::string>("asset_cache", *v);
  if (const json* v = r.find("taxonomy")) c.taxonomy = r.get<std::string>("taxonomy", *v);

  {
    const json& enc = r.require("encoders");
    ObjectReader er(enc, "encoders");
    for (auto it = enc.begin(); it != enc.end(); ++it) {
      EncoderName name;
      try {
        name = encoder_from_string(it.key());
      } catch (const std::exception&) {
        throw ConfigError("encoders." + it.key() + ": unknown encoder identity");
      }
      er.find(it.key());
      c.encoders[name] = er.get<std::string>(it.key(), it.value());
    }
    er.finish();
    if (c.encoders.empty()) throw ConfigError("encoders: at least one encoder is required");
  }
  if (const json* v = r.find("architectures")) {
    c.architectures.clear();
    for (const auto& s : r.get<std::vector<std::string>>("architectures", *v)) {
      try {
        c.architectures.push_back(architecture_from_string(s));
      } catch (const std::exception&) {
        throw ConfigError("architectures: unknown architecture '" + s + "'");
      }
    }
    if (c.architectures.empty()) throw ConfigError("architectures: must not be empty");
  }

  {
    ObjectReader cr(r.require("corpora"), "corpora");
    c.stress = parse_corpus(cr.require("stress"), "corpora.stress", {2122, 716, 715});
    c.minority = parse_corpus(cr.require("minority"), "corpora.minority", {0, 175, 175});
    c.emotion = parse_corpus(cr.require("emotion"), "corpora.emotion", {42409, 5425, 5426});
    cr.finish();
  }
  r.read("split_seed", c.split_seed);
  r.read("reduction_seed", c.reduction_seed);
  if (const json* v = r.find("reduction_fractions")) {
    c.reduction_fractions = r.get<std::vector<double>>("reduction_fractions", *v);
    for (double f : c.reduction_fractions)
      if (std::none_of(kReductionFractions.begin(), kReductionFractions.end(),
                       [&](double k) { return std::abs(k - f) < 1e-9; }))
        throw ConfigError("reduction_fractions: " + std::to_string(f) + " is not one of 0.10, 0.25, 0.50, 0.75, 1.00");
  }
  if (const json* v = r.find("seeds")) {
    const auto seeds = r.get<std::vector<std::uint64_t>>("seeds", *v);
    try {
      c.seeds = SeedSet::from(seeds);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("seeds: ") + e.what());
    }
  }

  if (const json* v = r.find("training")) {
    ObjectReader tr(*v, "training");
    tr.read("batch_size", c.training.batch_size);
    tr.read("eval_batch_size", c.training.eval_batch_size);
    tr.read("max_epochs", c.training.policy.max_epochs);
    tr.read("patience", c.training.policy.patience);
    tr.read("tolerance", c.training.policy.tolerance);
    tr.read("max_steps", c.training.max_steps);
    tr.finish();
    if (c.training.batch_size == 0 || c.training.eval_batch_size == 0)
      throw ConfigError("training: batch sizes must be positive");
    if (c.training.policy.max_epochs == 0) throw ConfigError("training.max_epochs: must be positive");
    if (!(c.training.policy.tolerance >= 0.0)) throw ConfigError("training.tolerance: must be non-negative");
  }
  if (const json* v = r.find("tuner")) {
    ObjectReader tr(*v, "tuner");
    tr.read("budget", c.tuner.budget);
    if (const json* s = tr.find("strategy")) {
      try {
        c.tuner.strategy = tuner_strategy_from_string(tr.get<std::string>("strategy", *s));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("tuner.strategy: ") + e.what());
      }
    }
    tr.read("seed", c.tuner.seed);
    tr.read("initial_random", c.tuner.initial_random);
    tr.read("candidates", c.tuner.candidates);
    tr.read("workers", c.tuner.workers);
    tr.read("enabled", c.tune);
    tr.finish();
    if (c.tuner.budget == 0) throw ConfigError("tuner.budget: must be at least 1");
    if (c.tuner.workers == 0) throw ConfigError("tuner.workers: must be at least 1");
  }
  if (const json* v = r.find("labeler")) {
    ObjectReader lr(*v, "labeler");
    if (const json* e = lr.find("encoder")) {
      try {
        c.labeler.encoder = encoder_from_string(lr.get<std::string>("encoder", *e));
      } catch (const std::exception&) {
        throw ConfigError("labeler.encoder: unknown encoder identity");
      }
    }
    lr.read("learning_rate", c.labeler.learning_rate);
    lr.read("dropout", c.labeler.dropout);
    lr.finish();
    if (c.labeler.encoder && !c.encoders.count(*c.labeler.encoder))
      throw ConfigError("labeler.encoder: not listed under encoders");
  }
  r.read("max_length", c.max_length);
  r.read("jobs", c.jobs);
  r.read("tiny_seed", c.tiny_seed);
  r.finish();

  if (c.max_length < 8) throw ConfigError("max_length: must be at least 8");
  if (c.jobs == 0) throw ConfigError("jobs: must be at least 1");
  try {
    c.labeler_model(c.encoder_names().front()).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("labeler: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse(io::read_file(path), std::filesystem::absolute(path).parent_path());
}

std::string RunConfig::to_json() const {
  json enc = json::object();
  for (auto name : encoder_names()) enc[std::string(to_string(name))] = encoders.at(name);
  json archs = json::array();
  for (auto a : architectures) archs.push_back(to_string(a));
  json j = {
      {"workspace", workspace.string()},
      {"output_dir", output_dir.string()},
      {"asset_cache", asset_cache ? json(asset_cache->string()) : json(nullptr)},
      {"taxonomy", taxonomy ? json(taxonomy->string()) : json(nullptr)},
      {"encoders", enc},
      {"architectures", archs},
      {"corpora", {{"stress", corpus_json(stress)}, {"minority", corpus_json(minority)}, {"emotion", corpus_json(emotion)}}},
      {"split_seed", split_seed},
      {"reduction_seed", reduction_seed},
      {"reduction_fractions", reduction_fractions},
      {"seeds", seeds.seeds},
      {"training",
       {{"batch_size", training.batch_size},
        {"eval_batch_size", training.eval_batch_size},
        {"max_epochs", training.policy.max_epochs},
        {"patience", training.policy.patience},
        {"tolerance", training.policy.tolerance},
        {"max_steps", training.max_steps ? json(*training.max_steps) : json(nullptr)}}},
      {"tuner",
       {{"enabled", tune},
        {"budget", tuner.budget},
        {"strategy", to_string(tuner.strategy)},
        {"seed", tuner.seed},
        {"initial_random", tuner.initial_random},
        {"candidates", tuner.candidates},
        {"workers", tuner.workers}}},
      {"labeler",
       {{"encoder", labeler.encoder ? json(to_string(*labeler.encoder)) : json(nullptr)},
        {"learning_rate", labeler.learning_rate},
        {"dropout", labeler.dropout}}},
      {"max_length", max_length},
      {"jobs", jobs},
      {"tiny_seed", tiny_seed}};
  return j.dump(2);
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : (workspace / p).lexically_normal();
}

std::filesystem::path RunConfig::asset_cache_dir() const {
  if (asset_cache) return resolve(*asset_cache);
  if (const char* env = std::getenv(kAssetCacheEnv)) return env;
  return {};
}

EncoderIdentity RunConfig::identity(EncoderName name) const {
  auto it = encoders.find(name);
  if (it == encoders.end()) throw ConfigError(std::string(to_string(name)) + " is not configured");
  return EncoderIdentity::standard(name, it->second);
}

std::vector<EncoderName> RunConfig::encoder_names() const {
  std::vector<EncoderName> out;
  for (auto name : kStudyEncoders)
    if (encoders.count(name)) out.push_back(name);
  if (encoders.count(EncoderName::TinyTest)) out.push_back(EncoderName::TinyTest);
  return out;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions o;
  o.batch_size = training.batch_size;
  o.eval_batch_size = training.eval_batch_size;
  o.policy = training.policy;
  o.max_steps = training.max_steps;
  return o;
}

ModelConfig RunConfig::default_model(Architecture a, EncoderName e) const {
  ModelConfig m;
  m.architecture = a;
  m.encoder = identity(e);
  if (a == Architecture::Multi) m.lambda = 0.5;
  return m;
}

ModelConfig RunConfig::labeler_model(EncoderName e) const {
  ModelConfig m;
  m.architecture = Architecture::SingleTask;
  m.encoder = identity(e);
  m.learning_rate = labeler.learning_rate;
  m.dropout = labeler.dropout;
  return m;
}

}  // namespace emostress
