// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/emotaxonomy.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "emostress/corpus.hpp"
#include "emostress/io/atomic_file.hpp"

namespace emostress {

const std::array<std::string_view, 28> kFineEmotionLabels = {
    "admiration", "amusement",   "anger",       "annoyance",    "approval",  "caring",
    "confusion",  "curiosity",   "desire",      "disappointment", "disapproval", "disgust",
    "embarrassment", "excitement", "fear",      "gratitude",    "grief",     "joy",
    "love",       "nervousness", "optimism",    "pride",        "realization", "relief",
    "remorse",    "sadness",     "surprise",    "neutral"};

namespace {

constexpr std::string_view kBuiltinMapping =
    "admiration\tjoy\namusement\tjoy\nanger\tanger\nannoyance\tanger\napproval\tjoy\n"
    "caring\tjoy\nconfusion\tsurprise\ncuriosity\tsurprise\ndesire\tjoy\n"
    "disappointment\tsadness\ndisapproval\tanger\ndisgust\tdisgust\nembarrassment\tsadness\n"
    "excitement\tjoy\nfear\tfear\ngratitude\tjoy\ngrief\tsadness\njoy\tjoy\nlove\tjoy\n"
    "nervousness\tfear\noptimism\tjoy\npride\tjoy\nrealization\tsurprise\nrelief\tjoy\n"
    "remorse\tsadness\nsadness\tsadness\nsurprise\tsurprise\nneutral\tneutral\n";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i)
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  return std::nullopt;
}

std::string to_string(const EmotionVector& v) {
  std::string out;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (!v.test(i)) continue;
    if (!out.empty()) out += ',';
    out += kEmotionNames[i];
  }
  return out;
}

EmotionTaxonomy EmotionTaxonomy::parse(std::string_view tsv) {
  EmotionTaxonomy tax;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto tab = stripped.find('\t');
    if (tab == std::string::npos)
      throw std::invalid_argument("taxonomy line " + std::to_string(lineno) +
                                  ": expected fine<TAB>coarse");
    const std::string fine = trim(std::string_view(stripped).substr(0, tab));
    const std::string coarse = trim(std::string_view(stripped).substr(tab + 1));
    const auto emotion = emotion_from_name(coarse);
    if (!emotion)
      throw std::invalid_argument("taxonomy line " + std::to_string(lineno) +
                                  ": unknown coarse label '" + coarse + "'");
    if (!tax.mapping_.emplace(fine, *emotion).second)
      throw std::invalid_argument("taxonomy line " + std::to_string(lineno) +
                                  ": duplicate fine label '" + fine + "'");
  }
  std::set<std::string_view> expected(kFineEmotionLabels.begin(), kFineEmotionLabels.end());
  for (const auto& [fine, coarse] : tax.mapping_)
    if (!expected.contains(fine))
      throw std::invalid_argument("taxonomy: '" + fine + "' is not one of the 28 fine labels");
  for (auto fine : kFineEmotionLabels)
    if (!tax.mapping_.contains(fine))
      throw std::invalid_argument("taxonomy: fine label '" + std::string(fine) + "' is unmapped");
  return tax;
}

EmotionTaxonomy EmotionTaxonomy::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

const EmotionTaxonomy& EmotionTaxonomy::builtin() {
  static const EmotionTaxonomy tax = parse(kBuiltinMapping);
  return tax;
}

std::optional<Emotion> EmotionTaxonomy::coarse_of(std::string_view fine) const {
  const auto it = mapping_.find(fine);
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

EmotionVector EmotionTaxonomy::map_fine_to_ekman(std::span<const std::string> fine_labels) const {
  if (fine_labels.empty()) throw std::invalid_argument("emotion labels must be non-empty");
  EmotionVector v;
  for (const auto& label : fine_labels) {
    const auto coarse = coarse_of(label);
    if (!coarse) throw std::invalid_argument("unknown fine emotion label '" + label + "'");
    v.set(static_cast<std::size_t>(*coarse));
  }
  return v;
}

EmotionVector EmotionTaxonomy::map_fine_indices(std::span<const std::size_t> indices) const {
  std::vector<std::string> names;
  names.reserve(indices.size());
  for (auto idx : indices) {
    if (idx >= kFineEmotionLabels.size())
      throw std::invalid_argument("fine emotion index " + std::to_string(idx) + " out of range");
    names.emplace_back(kFineEmotionLabels[idx]);
  }
  return map_fine_to_ekman(names);
}

TaxonomyReport validate_taxonomy(std::span<const TextExample> corpus) {
  TaxonomyReport report;
  for (const auto& ex : corpus) {
    if (!ex.emotions) continue;
    ++report.total;
    for (std::size_t i = 0; i < kEmotionCount; ++i)
      if (ex.emotions->test(i)) ++report.counts[i];
  }
  for (std::size_t i = 0; i < kEmotionCount; ++i)
    report.proportions[i] = report.total == 0 ? 0.0
                                              : static_cast<double>(report.counts[i]) /
                                                    static_cast<double>(report.total);
  return report;
}

}  // namespace emostress
