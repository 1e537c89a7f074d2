// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emostress {

struct TextExample;

inline constexpr std::size_t kEmotionCount = 7;

/// Coarse emotion labels. The order is frozen: emotion vectors, head logits
/// and checkpoints all index by it.
enum class Emotion : std::size_t { Anger, Disgust, Fear, Joy, Sadness, Surprise, Neutral };

inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "disgust", "fear", "joy", "sadness", "surprise", "neutral"};

/// Multi-label indicator vector; bit i corresponds to Emotion(i).
using EmotionVector = std::bitset<kEmotionCount>;

std::optional<Emotion> emotion_from_name(std::string_view name);
std::string to_string(const EmotionVector& v);  // e.g. "joy,neutral"

/// The 28 fine-grained emotion-corpus labels, in the corpus's published
/// index order (index 27 is neutral).
extern const std::array<std::string_view, 28> kFineEmotionLabels;

/// Fine-to-coarse relabeling table. Loaded from a `fine<TAB>coarse` fixture
/// whose entries must cover exactly the 28 fine labels.
class EmotionTaxonomy {
 public:
  static EmotionTaxonomy parse(std::string_view tsv);
  static EmotionTaxonomy load(const std::filesystem::path& path);
  /// The mapping shipped in data/ekman_mapping.tsv, compiled in.
  static const EmotionTaxonomy& builtin();

  /// Throws std::invalid_argument naming the first unknown label, or when
  /// the input is empty.
  EmotionVector map_fine_to_ekman(std::span<const std::string> fine_labels) const;
  EmotionVector map_fine_indices(std::span<const std::size_t> indices) const;

  std::optional<Emotion> coarse_of(std::string_view fine) const;
  std::size_t size() const { return mapping_.size(); }

 private:
  std::map<std::string, Emotion, std::less<>> mapping_;
};

struct TaxonomyReport {
  std::size_t total = 0;
  std::array<std::size_t, kEmotionCount> counts{};
  /// Share of examples carrying each label; need not sum to 1.
  std::array<double, kEmotionCount> proportions{};
};

/// Counts coarse labels over examples that carry an emotion vector.
TaxonomyReport validate_taxonomy(std::span<const TextExample> corpus);

/// Reference coarse-label counts for the full relabeled emotion corpus.
inline constexpr std::array<std::size_t, kEmotionCount> kPublishedCoarseCounts = {
    7022, 1013, 929, 21733, 4032, 6668, 17772};

}  // namespace emostress
