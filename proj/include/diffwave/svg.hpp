#pragma once

// Self-contained log-log SVG plots: one polyline per series plus a guide line
// with the expected slope. No plotting dependency.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffwave/decay.hpp"

namespace diffwave {

inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const TimeSeries& series, double expected_slope,
                             double guide_t0 = 0.0) {
  std::vector<std::pair<double, double>> pts;  // (log10(1+t), log10 v)
  for (const auto& s : series)
    if (s.value > 0.0 && s.t > 0.0)
      pts.push_back({std::log10(1.0 + s.t), std::log10(s.value)});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const int W = 640, H = 480, M = 56;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  if (pts.size() >= 2) {
    double x0 = pts.front().first, x1 = pts.back().first;
    double y0 = 1e300, y1 = -1e300;
    for (auto& p : pts) {
      y0 = std::min(y0, p.second);
      y1 = std::max(y1, p.second);
    }
    if (y1 - y0 < 1e-12) {
      y0 -= 0.5;
      y1 += 0.5;
    }
    auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
    out << "<rect x='" << M << "' y='" << M << "' width='" << W - 2 * M << "' height='"
        << H - 2 * M << "' fill='none' stroke='black'/>\n";
    out << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    for (auto& p : pts) out << px(p.first) << ',' << py(p.second) << ' ';
    out << "'/>\n";
    // guide line with the expected slope anchored at the series midpoint
    std::size_t anchor = pts.size() / 2;
    if (guide_t0 > 0.0)
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (std::pow(10.0, pts[i].first) - 1.0 >= guide_t0) {
          anchor = i;
          break;
        }
    const double gx0 = pts.front().first, gx1 = pts.back().first;
    const double gy0 = pts[anchor].second + expected_slope * (gx0 - pts[anchor].first);
    const double gy1 = pts[anchor].second + expected_slope * (gx1 - pts[anchor].first);
    out << "<line stroke='crimson' stroke-dasharray='6,4' x1='" << px(gx0) << "' y1='"
        << py(gy0) << "' x2='" << px(gx1) << "' y2='" << py(gy1) << "'/>\n";
    std::ostringstream lab;
    lab << "slope " << expected_slope;
    out << "<text x='" << W - M - 4 << "' y='" << M + 16
        << "' text-anchor='end' font-size='12' fill='crimson'>" << lab.str() << "</text>\n";
    // axis extremes
    out << "<text x='" << M << "' y='" << H - M + 16 << "' font-size='11'>log10(1+t)="
        << x0 << "</text>\n";
    out << "<text x='" << W - M << "' y='" << H - M + 16
        << "' text-anchor='end' font-size='11'>" << x1 << "</text>\n";
    out << "<text x='" << M - 4 << "' y='" << H - M << "' text-anchor='end' font-size='11'>"
        << y0 << "</text>\n";
    out << "<text x='" << M - 4 << "' y='" << M + 4 << "' text-anchor='end' font-size='11'>"
        << y1 << "</text>\n";
  } else {
    out << "<text x='" << W / 2 << "' y='" << H / 2
        << "' text-anchor='middle' font-size='12'>degenerate (zero series)</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace diffwave
