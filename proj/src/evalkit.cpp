// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace emostress {

using nlohmann::ordered_json;

ConfusionCounts ConfusionCounts::from(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size())
    throw std::invalid_argument("prediction/gold length mismatch: " + std::to_string(preds.size()) +
                                " vs " + std::to_string(golds.size()));
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1))
      throw std::invalid_argument("labels must be 0 or 1");
    if (p == 1 && g == 1) ++c.tp;
    else if (p == 1) ++c.fp;
    else if (g == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Score f1_from_counts(const ConfusionCounts& c) {
  // 2PR/(P+R) == 2tp/(2tp+fp+fn); the denominator is zero exactly when
  // there are no positives on either side.
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (c.tp == 0) return {0.0, denom == 0};
  return {100.0 * 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom), false};
}

Score binary_f1(std::span<const int> preds, std::span<const int> golds) {
  return f1_from_counts(ConfusionCounts::from(preds, golds));
}

double accuracy(std::span<const int> preds, std::span<const int> golds) {
  const auto c = ConfusionCounts::from(preds, golds);
  if (c.total() == 0) throw std::invalid_argument("accuracy of an empty set");
  return 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

MacroF1 macro_f1(std::span<const EmotionVector> preds, std::span<const EmotionVector> golds) {
  if (preds.size() != golds.size()) throw std::invalid_argument("prediction/gold length mismatch");
  MacroF1 out;
  std::vector<int> p(preds.size()), g(golds.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      p[i] = preds[i].test(k) ? 1 : 0;
      g[i] = golds[i].test(k) ? 1 : 0;
    }
    out.per_label[k] = binary_f1(p, g);
    sum += out.per_label[k].value;
  }
  out.value = sum / static_cast<double>(kEmotionCount);
  return out;
}

MacroF1 macro_f1(std::span<const std::vector<int>> preds, std::span<const std::vector<int>> golds) {
  auto convert = [](std::span<const std::vector<int>> rows) {
    std::vector<EmotionVector> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      if (r.size() != kEmotionCount) throw std::invalid_argument("emotion rows must be 7 wide");
      EmotionVector v;
      for (std::size_t k = 0; k < kEmotionCount; ++k) {
        if (r[k] != 0 && r[k] != 1) throw std::invalid_argument("labels must be 0 or 1");
        v.set(k, r[k] == 1);
      }
      out.push_back(v);
    }
    return out;
  };
  if (preds.size() != golds.size()) throw std::invalid_argument("prediction/gold length mismatch");
  const auto p = convert(preds), g = convert(golds);
  return macro_f1(std::span<const EmotionVector>(p), std::span<const EmotionVector>(g));
}

MetricReport evaluate_binary(std::span<const int> preds, std::span<const int> golds,
                             std::string eval_set) {
  MetricReport r;
  const auto f1 = binary_f1(preds, golds);
  r.f1 = f1.value;
  r.f1_degenerate = f1.degenerate;
  r.accuracy = accuracy(preds, golds);
  r.n = preds.size();
  r.eval_set = std::move(eval_set);
  return r;
}

std::string MetricReport::to_json() const {
  ordered_json j = {{"eval_set", eval_set}, {"n", n},   {"f1", f1},
                    {"accuracy", accuracy}, {"f1_degenerate", f1_degenerate}};
  if (macro_f1) j["macro_f1"] = *macro_f1;
  return j.dump();
}

MetricReport MetricReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricReport r;
  r.eval_set = j.at("eval_set");
  r.n = j.at("n");
  r.f1 = j.at("f1");
  r.accuracy = j.at("accuracy");
  r.f1_degenerate = j.value("f1_degenerate", false);
  if (j.contains("macro_f1")) r.macro_f1 = j["macro_f1"].get<double>();
  return r;
}

MetricReport MetricReport::mean(std::span<const MetricReport> reports) {
  if (reports.empty()) throw std::invalid_argument("mean of no reports");
  MetricReport m;
  m.eval_set = reports.front().eval_set;
  m.n = reports.front().n;
  double macro = 0.0;
  bool have_macro = true;
  for (const auto& r : reports) {
    if (r.eval_set != m.eval_set) throw std::invalid_argument("mixing eval sets in a mean");
    m.f1 += r.f1;
    m.accuracy += r.accuracy;
    m.f1_degenerate = m.f1_degenerate || r.f1_degenerate;
    if (r.macro_f1) macro += *r.macro_f1;
    else have_macro = false;
  }
  const double k = static_cast<double>(reports.size());
  m.f1 /= k;
  m.accuracy /= k;
  if (have_macro) m.macro_f1 = macro / k;
  return m;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

ResultsGrid::ResultsGrid(std::string title, std::vector<std::string> rows,
                         std::vector<std::string> columns)
    : title_(std::move(title)), rows_(std::move(rows)), columns_(std::move(columns)) {}

void ResultsGrid::set(const std::string& row, const std::string& column, MetricReport report) {
  if (std::find(rows_.begin(), rows_.end(), row) == rows_.end() ||
      std::find(columns_.begin(), columns_.end(), column) == columns_.end())
    throw std::invalid_argument("unknown grid cell " + row + " / " + column);
  cells_[{row, column}] = std::move(report);
}

std::optional<MetricReport> ResultsGrid::get(const std::string& row,
                                             const std::string& column) const {
  auto it = cells_.find({row, column});
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

std::string ResultsGrid::render_text() const {
  // Column maxima compare the printed (rounded) values so ties bold together.
  auto rounded = [](double v) { return std::stod(format_percent(v)); };
  std::map<std::string, double> best_f1, best_acc;
  for (const auto& [key, r] : cells_) {
    const auto& col = key.second;
    best_f1[col] = std::max(best_f1.count(col) ? best_f1[col] : -1.0, rounded(r.f1));
    best_acc[col] = std::max(best_acc.count(col) ? best_acc[col] : -1.0, rounded(r.accuracy));
  }
  std::ostringstream out;
  out << "# " << title_ << "\n\n| Model |";
  for (const auto& c : columns_) out << ' ' << c << " F1 | " << c << " Acc |";
  out << "\n|---|";
  for (std::size_t i = 0; i < columns_.size(); ++i) out << "---|---|";
  out << '\n';
  auto cell = [&](double v, double best) {
    const std::string s = format_percent(v);
    return rounded(v) == best ? "**" + s + "**" : s;
  };
  for (const auto& r : rows_) {
    out << "| " << r << " |";
    for (const auto& c : columns_) {
      auto it = cells_.find({r, c});
      if (it == cells_.end()) {
        out << " - | - |";
      } else {
        out << ' ' << cell(it->second.f1, best_f1[c]) << " | "
            << cell(it->second.accuracy, best_acc[c]) << " |";
      }
    }
    out << '\n';
  }
  if (reference_) {
    out << "| " << reference_->first << " |";
    for (std::size_t i = 0; i < columns_.size(); ++i)
      out << ' ' << format_percent(reference_->second) << " | - |";
    out << '\n';
  }
  return out.str();
}

std::string ResultsGrid::render_jsonl() const {
  std::string out;
  for (const auto& r : rows_) {
    for (const auto& c : columns_) {
      auto it = cells_.find({r, c});
      if (it == cells_.end()) continue;
      auto j = ordered_json::parse(it->second.to_json());
      ordered_json line = {{"grid", title_}, {"architecture", r}, {"encoder", c}};
      line.update(j);
      out += line.dump() + '\n';
    }
  }
  return out;
}

}  // namespace emostress
