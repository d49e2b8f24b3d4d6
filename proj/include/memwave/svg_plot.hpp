#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace memwave {

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct PanelFrame {
  double x0, y0, w, h;       // plot area in page coordinates
  double tmin, tmax, ymin, ymax;

  double px(double t) const { return x0 + (t - tmin) / (tmax - tmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

inline void draw_panel(std::string& s, const PanelFrame& f,
                       const std::vector<std::pair<double, double>>& pts,
                       const std::string& y_label) {
  s += "<rect x='" + svg_num(f.x0) + "' y='" + svg_num(f.y0) + "' width='" +
       svg_num(f.w) + "' height='" + svg_num(f.h) +
       "' fill='none' stroke='#444' stroke-width='1'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = f.tmin + (f.tmax - f.tmin) * i / 5.0;
    const double x = f.px(t);
    s += "<line x1='" + svg_num(x) + "' y1='" + svg_num(f.y0 + f.h) + "' x2='" +
         svg_num(x) + "' y2='" + svg_num(f.y0 + f.h + 5) +
         "' stroke='#444'/>\n";
    s += "<text x='" + svg_num(x) + "' y='" + svg_num(f.y0 + f.h + 18) +
         "' font-size='11' text-anchor='middle'>" + tick_label(t) + "</text>\n";
    const double yv = f.ymin + (f.ymax - f.ymin) * i / 5.0;
    const double y = f.py(yv);
    s += "<line x1='" + svg_num(f.x0 - 5) + "' y1='" + svg_num(y) + "' x2='" +
         svg_num(f.x0) + "' y2='" + svg_num(y) + "' stroke='#444'/>\n";
    s += "<text x='" + svg_num(f.x0 - 8) + "' y='" + svg_num(y + 4) +
         "' font-size='11' text-anchor='end'>" + tick_label(yv) + "</text>\n";
  }
  s += "<text x='" + svg_num(f.x0 + f.w / 2) + "' y='" +
       svg_num(f.y0 + f.h + 34) + "' font-size='12' text-anchor='middle'>t</text>\n";
  s += "<text x='" + svg_num(f.x0 - 52) + "' y='" + svg_num(f.y0 + f.h / 2) +
       "' font-size='12' text-anchor='middle' transform='rotate(-90 " +
       svg_num(f.x0 - 52) + " " + svg_num(f.y0 + f.h / 2) + ")'>" + y_label +
       "</text>\n";
  s += "<polyline fill='none' stroke='#1f6fb2' stroke-width='1.5' points='";
  for (const auto& [t, y] : pts)
    s += svg_num(f.px(t)) + "," + svg_num(f.py(y)) + " ";
  s += "'/>\n";
}

}  // namespace detail

/// Two stacked panels of the same series: value and log10(value). Points with
/// non-positive values are dropped from the log panel only.
inline std::string plot_svg(const std::vector<std::pair<double, double>>& series,
                            const std::string& title) {
  if (series.size() < 2) throw Error("plot: need at least two points");
  using detail::PanelFrame;
  double tmin = series.front().first, tmax = series.back().first;
  if (!(tmax > tmin)) tmax = tmin + 1.0;
  double ymin = series.front().second, ymax = ymin;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [t, y] : series) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
    if (y > 0.0) logs.emplace_back(t, std::log10(y));
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);

  std::string s =
      "<svg xmlns='http://www.w3.org/2000/svg' width='860' height='660' "
      "viewBox='0 0 860 660'>\n<rect width='860' height='660' fill='white'/>\n";
  s += "<text x='430' y='24' font-size='15' text-anchor='middle'>" + title +
       "</text>\n";

  PanelFrame top{90, 45, 720, 240, tmin, tmax, ymin - pad, ymax + pad};
  detail::draw_panel(s, top, series, "E");

  if (logs.size() >= 2) {
    double lmin = logs.front().second, lmax = lmin;
    for (const auto& [t, y] : logs) {
      lmin = std::min(lmin, y);
      lmax = std::max(lmax, y);
    }
    if (lmax == lmin) lmax = lmin + 1.0;
    const double lpad = 0.05 * (lmax - lmin);
    PanelFrame bot{90, 375, 720, 240, tmin, tmax, lmin - lpad, lmax + lpad};
    detail::draw_panel(s, bot, logs, "log10 E");
  } else {
    s += "<text x='430' y='495' font-size='13' text-anchor='middle'>no "
         "positive values for the log panel</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace memwave
