// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emostress/emotaxonomy.hpp"

namespace emostress {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  /// Positive class is 1. Throws on length mismatch or non-binary labels.
  static ConfusionCounts from(std::span<const int> preds, std::span<const int> golds);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A percentage with a flag for the 0/0 convention.
struct Score {
  double value = 0.0;
  bool degenerate = false;  // precision + recall was 0; value set to 0
};

Score f1_from_counts(const ConfusionCounts& c);
/// Binary F1 of the positive class, as a percentage.
Score binary_f1(std::span<const int> preds, std::span<const int> golds);
double accuracy(std::span<const int> preds, std::span<const int> golds);

struct MacroF1 {
  double value = 0.0;
  std::array<Score, kEmotionCount> per_label{};
};

/// Unweighted mean of the 7 per-label binary F1 scores.
MacroF1 macro_f1(std::span<const EmotionVector> preds, std::span<const EmotionVector> golds);
/// Same on plain 0/1 rows; throws unless every row is 7 wide.
MacroF1 macro_f1(std::span<const std::vector<int>> preds, std::span<const std::vector<int>> golds);

struct MetricReport {
  double f1 = 0.0;        // percent
  double accuracy = 0.0;  // percent
  std::optional<double> macro_f1;
  std::size_t n = 0;
  std::string eval_set;
  bool f1_degenerate = false;

  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
  /// Field-wise arithmetic mean; all reports must share the eval set.
  static MetricReport mean(std::span<const MetricReport> reports);
};

MetricReport evaluate_binary(std::span<const int> preds, std::span<const int> golds,
                             std::string eval_set);

/// Prior best minority-stress F1 shown as a reference row under the grid.
inline constexpr double kPriorMinorityF1 = 75.0;

/// Architecture x encoder grid of seed-averaged reports.
class ResultsGrid {
 public:
  ResultsGrid(std::string title, std::vector<std::string> rows, std::vector<std::string> columns);

  void set(const std::string& row, const std::string& column, MetricReport report);
  std::optional<MetricReport> get(const std::string& row, const std::string& column) const;
  void set_reference(std::string label, double f1) { reference_ = {std::move(label), f1}; }

  const std::string& title() const { return title_; }
  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }

  /// Markdown-style table with F1/Acc per encoder. Column-wise maxima are
  /// wrapped in ** **; missing cells show "-".
  std::string render_text() const;
  /// One JSON object per present cell.
  std::string render_jsonl() const;

 private:
  std::string title_;
  std::vector<std::string> rows_, columns_;
  std::map<std::pair<std::string, std::string>, MetricReport> cells_;
  std::optional<std::pair<std::string, double>> reference_;
};

/// Fixed two-decimal formatting used by every report.
std::string format_percent(double v);

}  // namespace emostress
