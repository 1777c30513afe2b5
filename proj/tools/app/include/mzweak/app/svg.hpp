#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mzweak::app {

enum class SeriesStyle { line, markers };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional symmetric error bars, same length as y
  SeriesStyle style = SeriesStyle::line;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> y_min;  // fixed axis limits, otherwise from the data
  std::optional<double> y_max;
};

/// Self-contained SVG: axes, ticks, polylines or markers, legend. Non-finite
/// points are skipped. `timestamp`, when given, is written as a comment.
std::string render_svg(const Plot& plot, const std::optional<std::string>& timestamp = std::nullopt);

}  // namespace mzweak::app
