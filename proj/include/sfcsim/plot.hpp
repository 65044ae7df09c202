#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sfcsim/errors.hpp"

namespace sfcsim {

struct PlotSeries {
  std::string label;
  const std::vector<double>* time = nullptr;
  const std::vector<double>* values = nullptr;
  std::string colour = "#1f77b4";
};

namespace plot_detail {

// 1-2-5 tick spacing giving roughly `target` intervals.
inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::defaultfloat << std::setprecision(4) << (std::abs(v) < 1e-12 ? 0.0 : v);
  return os.str();
}

}  // namespace plot_detail

// Static line chart as an SVG document. Only reads the series.
inline std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                              const std::string& y_label, const std::string& x_label = "time [s]") {
  using namespace plot_detail;
  constexpr double W = 900, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries& s : series) {
    for (std::size_t k = 0; k < s.time->size(); ++k) {
      x0 = std::min(x0, (*s.time)[k]);
      x1 = std::max(x1, (*s.time)[k]);
      y0 = std::min(y0, (*s.values)[k]);
      y1 = std::max(y1, (*s.values)[k]);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";

  const double xs = nice_step(x1 - x0, 10);
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
    os << "<line x1=\"" << px(x) << "\" y1=\"" << T << "\" x2=\"" << px(x) << "\" y2=\"" << H - B
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  const double ys = nice_step(y1 - y0, 8);
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
    os << "<line x1=\"" << L << "\" y1=\"" << py(y) << "\" x2=\"" << W - R << "\" y2=\"" << py(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
     << y_label << "</text>\n";

  double legend_y = T + 16;
  for (const PlotSeries& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.time->size(); ++k) os << px((*s.time)[k]) << ',' << py((*s.values)[k]) << ' ';
    os << "\"/>\n";
    os << "<line x1=\"" << W - R - 150 << "\" y1=\"" << legend_y - 4 << "\" x2=\"" << W - R - 125 << "\" y2=\""
       << legend_y - 4 << "\" stroke=\"" << s.colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R - 120 << "\" y=\"" << legend_y << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_svg(const std::string& path, const std::string& svg) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write '" + path + "'");
  os << svg;
}

}  // namespace sfcsim
