// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace emostress::plot {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kWidth = 720, kHeight = 440;
constexpr int kLeft = 70, kRight = 200, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
         std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + std::to_string(kWidth / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
}

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string frame(const Axes& a, const std::string& x_label, const std::string& y_label, int y_ticks) {
  std::string s;
  const int plot_right = kWidth - kRight, plot_bottom = kHeight - kBottom;
  s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(plot_bottom) + "\" x2=\"" +
       std::to_string(plot_right) + "\" y2=\"" + std::to_string(plot_bottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
       std::to_string(kLeft) + "\" y2=\"" + std::to_string(plot_bottom) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = a.y0 + (a.y1 - a.y0) * i / y_ticks;
    s += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + num(a.py(v) + 4) + "\" text-anchor=\"end\">" +
         num(v) + "</text>\n";
    s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + num(a.py(v)) + "\" x2=\"" +
         std::to_string(plot_right) + "\" y2=\"" + num(a.py(v)) + "\" stroke=\"#ddd\"/>\n";
  }
  s += "<text x=\"" + std::to_string((kLeft + plot_right) / 2) + "\" y=\"" + std::to_string(kHeight - 15) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + std::to_string((kTop + plot_bottom) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return s;
}

std::string legend_entry(std::size_t i, const std::string& name, const std::string& color, bool dashed) {
  const int y = kTop + 10 + static_cast<int>(i) * 18;
  const int x = kWidth - kRight + 15;
  return "<line x1=\"" + std::to_string(x) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" + std::to_string(x + 20) +
         "\" y2=\"" + std::to_string(y) + "\" stroke=\"" + color + "\" stroke-width=\"3\"" +
         (dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n<text x=\"" + std::to_string(x + 26) + "\" y=\"" +
         std::to_string(y + 4) + "\">" + escape(name) + "</text>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  ymin = std::floor(ymin / 5.0) * 5.0;
  ymax = std::ceil(ymax / 5.0) * 5.0;
  if (ymax == ymin) ymax = ymin + 5;
  const Axes a{xmin, xmax, ymin, ymax};

  std::string svg = header(title) + frame(a, x_label, y_label, 5);
  std::vector<double> xs;
  for (const auto& s : series)
    for (auto [x, y] : s.points) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs)
    svg += "<text x=\"" + num(a.px(x)) + "\" y=\"" + std::to_string(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\">" + num(x) + "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (auto [x, y] : s.points) pts += num(a.px(x)) + "," + num(a.py(y)) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"" + pts + "\"/>\n";
    for (auto [x, y] : s.points)
      svg += "<circle cx=\"" + num(a.px(x)) + "\" cy=\"" + num(a.py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    svg += legend_entry(i, s.name, color, s.dashed);
  }
  return svg + "</svg>\n";
}

std::string grouped_bar_chart(const std::string& title, const std::vector<std::string>& categories,
                              const std::vector<BarGroup>& groups) {
  double ymax = 0.0;
  for (const auto& g : groups)
    for (double v : g.values) ymax = std::max(ymax, v);
  ymax = std::max(0.1, std::ceil(ymax * 10.0) / 10.0);
  const Axes a{0.0, static_cast<double>(std::max<std::size_t>(categories.size(), 1)), 0.0, ymax};
  std::string svg = header(title) + frame(a, "label", "proportion", 5);
  const double slot = a.px(1.0) - a.px(0.0);
  const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    svg += "<text x=\"" + num(a.px(c + 0.5)) + "\" y=\"" + std::to_string(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\">" + escape(categories[c]) + "</text>\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double v = c < groups[g].values.size() ? groups[g].values[c] : 0.0;
      const double x = a.px(static_cast<double>(c)) + slot * 0.1 + bar * static_cast<double>(g);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(a.py(v)) + "\" width=\"" + num(bar) + "\" height=\"" +
             num(a.py(0.0) - a.py(v)) + "\" fill=\"" + kPalette[g % std::size(kPalette)] + "\"/>\n";
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    svg += legend_entry(g, groups[g].name, kPalette[g % std::size(kPalette)], false);
  return svg + "</svg>\n";
}

}  // namespace emostress::plot
