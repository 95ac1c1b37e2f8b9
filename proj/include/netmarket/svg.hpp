#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "netmarket/csv.hpp"
#include "netmarket/errors.hpp"

namespace netmarket {

/// One polyline on a chart.
struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// A deliberately small hand-emitted SVG line chart: axes, ticks, one
/// polyline per series, and a legend.  Plots are a reading aid; the CSV
/// next to them is the actual output contract.
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)),
        y_label_(std::move(y_label)) {}

  void add_series(Series s) {
    if (s.xs.size() != s.ys.size() || s.xs.empty()) {
      throw invalid_parameter("chart series needs matching, nonempty x/y vectors");
    }
    series_.push_back(std::move(s));
  }

  void render(std::ostream& out) const {
    if (series_.empty()) {
      throw invalid_parameter("chart has no series");
    }
    const int w = 720, h = 480, ml = 72, mr = 160, mt = 40, mb = 56;
    const int pw = w - ml - mr, ph = h - mt - mb;

    double x_min = series_[0].xs[0], x_max = x_min;
    double y_min = series_[0].ys[0], y_max = y_min;
    for (const auto& s : series_) {
      for (double x : s.xs) { x_min = std::min(x_min, x); x_max = std::max(x_max, x); }
      for (double y : s.ys) { y_min = std::min(y_min, y); y_max = std::max(y_max, y); }
    }
    if (x_max == x_min) { x_max += 1.0; x_min -= 1.0; }
    if (y_max == y_min) { y_max += 1.0; y_min -= 1.0; }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double x) {
      return ml + pw * (x - x_min) / (x_max - x_min);
    };
    auto py = [&](double y) {
      return mt + ph * (1.0 - (y - y_min) / (y_max - y_min));
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title_ << "</text>\n";

    // Axes.
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";

    // Ticks and grid lines, five per axis.
    for (int i = 0; i <= 4; ++i) {
      const double fx = x_min + (x_max - x_min) * i / 4.0;
      const double fy = y_min + (y_max - y_min) * i / 4.0;
      const double tx = px(fx), ty = py(fy);
      out << "<line x1=\"" << tx << "\" y1=\"" << mt + ph << "\" x2=\"" << tx
          << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << tx << "\" y=\"" << mt + ph + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">" << tick_label(fx) << "</text>\n";
      out << "<line x1=\"" << ml - 5 << "\" y1=\"" << ty << "\" x2=\"" << ml
          << "\" y2=\"" << ty << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << ml - 8 << "\" y=\"" << ty + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << tick_label(fy) << "</text>\n";
      if (i > 0) {
        out << "<line x1=\"" << ml << "\" y1=\"" << ty << "\" x2=\"" << ml + pw
            << "\" y2=\"" << ty << "\" stroke=\"#dddddd\"/>\n";
      }
    }

    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label_ << "</text>\n";
    out << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label_
        << "</text>\n";

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};
    const std::size_t n_colors = sizeof(kPalette) / sizeof(kPalette[0]);
    for (std::size_t si = 0; si < series_.size(); ++si) {
      const auto& s = series_[si];
      out << "<polyline fill=\"none\" stroke=\"" << kPalette[si % n_colors]
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (i > 0) out << ' ';
        out << coord(px(s.xs[i])) << ',' << coord(py(s.ys[i]));
      }
      out << "\"/>\n";
      // Legend entry.
      const int ly = mt + 16 + static_cast<int>(si) * 18;
      out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
          << ml + pw + 34 << "\" y2=\"" << ly << "\" stroke=\""
          << kPalette[si % n_colors] << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
          << "</text>\n";
    }
    out << "</svg>\n";
  }

 private:
  /// Short, locale-independent tick text (4 significant digits).
  static std::string tick_label(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 4);
    return std::string(buf, res.ptr);
  }

  /// Pixel coordinates rounded to 0.01 to keep files small and stable.
  static std::string coord(double v) {
    return format_double(std::round(v * 100.0) / 100.0);
  }

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
};

}  // namespace netmarket
