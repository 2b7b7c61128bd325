#include "hinftrack/cli/svg_plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hinftrack::cli {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

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

// Round step for about `target` ticks over [lo, hi].
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  auto tr = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double v) { return std::isfinite(v) && (!spec.log_y || v > 0.0); };

  std::size_t n = 0;
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& s : series) {
    n = std::max(n, s.y.size());
    for (double v : s.y) {
      if (!usable(v)) continue;
      ylo = std::min(ylo, tr(v));
      yhi = std::max(yhi, tr(v));
    }
  }
  if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
  if (yhi - ylo < 1e-12 * std::max(1.0, std::abs(yhi))) ylo -= 0.5, yhi += 0.5;
  const double xhi = n > 1 ? static_cast<double>(n - 1) : 1.0;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * x / xhi; };
  auto py = [&](double y) { return kTop + ph * (1.0 - (y - ylo) / (yhi - ylo)); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      kWidth, kHeight, kWidth, kHeight, kLeft + pw / 2, escape(spec.title));

  // Axes and ticks.
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  const double xs = nice_step(xhi, 8);
  for (double x = 0; x <= xhi + 1e-9; x += xs) {
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:g}</text>\n",
        px(x), kTop + ph, kTop + ph + 5, kTop + ph + 18, x);
  }
  const double ys = spec.log_y ? std::max(1.0, std::ceil((yhi - ylo) / 8)) : nice_step(yhi - ylo, 6);
  for (double y = std::ceil(ylo / ys) * ys; y <= yhi + 1e-9 * ys; y += ys) {
    const std::string label = spec.log_y ? fmt::format("1e{:g}", y) : fmt::format("{:.4g}", y);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5}</text>\n",
        kLeft, py(y), kLeft + pw, kLeft - 6, py(y) + 4, label);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 12,
                     escape(spec.x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     kTop + ph / 2, escape(spec.y_label));

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    std::string pts;
    auto flush = [&]() {
      if (!pts.empty()) {
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.3\" points=\"{}\"/>\n", color, pts);
        pts.clear();
      }
    };
    for (std::size_t k = 0; k < series[s].y.size(); ++k) {
      const double v = series[s].y[k];
      if (!usable(v)) {
        flush();
        continue;
      }
      pts += fmt::format("{:.2f},{:.2f} ", px(static_cast<double>(k)), py(tr(v)));
    }
    flush();
    const double ly = kTop + 10 + 18 * static_cast<double>(s);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        kLeft + pw + 12, ly, kLeft + pw + 36, color, kLeft + pw + 42, ly + 4, escape(series[s].label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace hinftrack::cli
