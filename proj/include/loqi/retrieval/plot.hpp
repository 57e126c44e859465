#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loqi/retrieval/retrieval.hpp"

namespace loqi {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  double y_min = 0.0;
  double y_max = 100.0;
  int width = 640;
  int height = 420;
};

/// Standalone SVG line chart with markers, axis ticks and a legend.
std::string render_line_plot_svg(const PlotSpec& spec, std::span<const PlotSeries> series);

/// Recall against N, one series per report.
std::string recall_vs_n_svg(std::span<const RecallReport> reports);

/// R@n against bitrate for reports that carry one, grouped by label.
std::string recall_vs_bitrate_svg(std::span<const RecallReport> reports, int n);

}  // namespace loqi
