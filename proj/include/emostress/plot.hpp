// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

// Minimal static SVG charts for study outputs. Each chart is written next
// to the table it was drawn from.

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace emostress::plot {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

struct BarGroup {
  std::string name;            // legend entry
  std::vector<double> values;  // one per category
};

/// Grouped bars, one cluster per category; values expected in [0, 1].
std::string grouped_bar_chart(const std::string& title, const std::vector<std::string>& categories,
                              const std::vector<BarGroup>& groups);

}  // namespace emostress::plot
