#pragma once

// Minimal line plots written as standalone SVG files.

#include <string>
#include <vector>

namespace hinftrack::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // plotted against k = 0, 1, …
};

struct PlotSpec {
  std::string title;
  std::string x_label = "k";
  std::string y_label;
  bool log_y = false;  // nonpositive values are skipped
};

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace hinftrack::cli
