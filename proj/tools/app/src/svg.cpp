#include "mzweak/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mzweak/io.hpp"

namespace mzweak::app {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  // Two decimals are plenty for coordinates and keep the files stable.
  return io::format_double(std::round(x * 100.0) / 100.0);
}

/// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string render_svg(const Plot& plot, const std::optional<std::string>& timestamp) {
  Range xr;
  Range yr;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xr.add(s.x[i]);
      const double e = i < s.y_err.size() && std::isfinite(s.y_err[i]) ? s.y_err[i] : 0.0;
      yr.add(s.y[i] - e);
      yr.add(s.y[i] + e);
    }
  }
  xr.finalize();
  if (plot.y_min) yr.lo = *plot.y_min;
  if (plot.y_max) yr.hi = *plot.y_max;
  yr.finalize();
  if (!plot.y_min || !plot.y_max) {
    const double pad = 0.05 * (yr.hi - yr.lo);
    if (!plot.y_min) yr.lo -= pad;
    if (!plot.y_max) yr.hi += pad;
  }

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (timestamp) os << "<!-- generated " << escape(*timestamp) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(plot.title) << "</text>\n";

  // Axes and ticks.
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const double t : ticks(xr.lo, xr.hi)) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
       << num(kTop + ph + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << io::format_double(t) << "</text>\n";
  }
  for (const double t : ticks(yr.lo, yr.hi)) {
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(py(t)) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
       << io::format_double(t) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
     << escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(plot.y_label) << "</text>\n";

  os << "<g clip-path=\"url(#plot)\">\n";
  os << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
  for (const auto& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.style == SeriesStyle::line) {
      // Break the polyline at non-finite points.
      std::string points;
      auto flush = [&] {
        if (points.empty()) return;
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << points << "\"/>\n";
        points.clear();
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        points += (points.empty() ? "" : " ") + num(px(s.x[i])) + "," + num(py(s.y[i]));
      }
      flush();
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (i < s.y_err.size() && std::isfinite(s.y_err[i]) && s.y_err[i] > 0.0) {
          os << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - s.y_err[i])) << "\" x2=\""
             << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + s.y_err[i])) << "\" stroke=\"" << s.color
             << "\"/>";
        }
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
           << s.color << "\"/>\n";
      }
    }
  }
  os << "</g>\n";

  double ly = kTop + 10;
  for (const auto& s : plot.series) {
    const double lx = kLeft + pw + 12;
    if (s.style == SeriesStyle::line) {
      os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\"" << num(ly)
         << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
         << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>";
    } else {
      os << "<circle cx=\"" << num(lx + 11) << "\" cy=\"" << num(ly) << "\" r=\"3\" fill=\"" << s.color << "\"/>";
    }
    os << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mzweak::app
