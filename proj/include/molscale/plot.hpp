//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molscale/io.hpp"

namespace molscale {

struct PlotPoint {
  double x = 0;
  double y = 0;
  bool in_range = true;
};

struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  std::optional<std::pair<double, double>> shaded_x;  // e.g. the compute span of the grid
};

/// Columns x, y, series, in_range; one row per point in series order.
inline std::string plot_csv(const std::vector<PlotSeries> &series) {
  std::string out = "x,y,series,in_range\n";
  for (const PlotSeries &s: series)
    for (const PlotPoint &p: s.points)
      out += format_number(p.x) + ',' + format_number(p.y) + ',' + s.name + ','
             + (p.in_range ? "1" : "0") + '\n';
  return out;
}

namespace detail {

inline std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c: s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

inline std::string px(double v) { return format_fixed(v, 2); }

inline constexpr std::array<const char *, 6> kPalette = { "#1f77b4", "#d62728", "#2ca02c",
                                                          "#9467bd", "#ff7f0e", "#17becf" };

}  // namespace detail

/// Standalone SVG line chart. Segments with an extrapolated endpoint are
/// dashed; a series with one point is drawn as a marker.
inline std::string plot_svg(const std::vector<PlotSeries> &series, const PlotSpec &spec) {
  constexpr double kW = 720, kH = 440, kL = 80, kR = 170, kT = 40, kB = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const PlotSeries &s: series)
    for (const PlotPoint &p: s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || (spec.log_x && !(p.x > 0)))
        continue;
      const double x = spec.log_x ? std::log10(p.x) : p.x;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  if (!(x0 <= x1))
    throw std::invalid_argument("plot needs at least one finite point");
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) {
    const double v = spec.log_x ? std::log10(x) : x;
    return kL + (v - x0) / (x1 - x0) * (kW - kL - kR);
  };
  auto sy = [&](double y) { return kT + (y1 - y) / (y1 - y0) * (kH - kT - kB); };
  using detail::px;

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kW) + "\" height=\"" + px(kH)
       + "\" viewBox=\"0 0 " + px(kW) + " " + px(kH) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + px(kW) + "\" height=\"" + px(kH) + "\" fill=\"#ffffff\"/>\n";
  if (spec.shaded_x) {
    const double a = std::clamp(sx(spec.shaded_x->first), kL, kW - kR);
    const double b = std::clamp(sx(spec.shaded_x->second), kL, kW - kR);
    if (b > a)
      o += "<rect x=\"" + px(a) + "\" y=\"" + px(kT) + "\" width=\"" + px(b - a) + "\" height=\""
           + px(kH - kT - kB) + "\" fill=\"#dddddd\" fill-opacity=\"0.6\"/>\n";
  }
  o += "<line x1=\"" + px(kL) + "\" y1=\"" + px(kH - kB) + "\" x2=\"" + px(kW - kR) + "\" y2=\""
       + px(kH - kB) + "\" stroke=\"#000000\"/>\n";
  o += "<line x1=\"" + px(kL) + "\" y1=\"" + px(kT) + "\" x2=\"" + px(kL) + "\" y2=\"" + px(kH - kB)
       + "\" stroke=\"#000000\"/>\n";

  // x ticks: decades on a log axis, five even steps otherwise
  std::vector<std::pair<double, std::string>> xt;
  if (spec.log_x) {
    for (int e = static_cast<int>(std::ceil(x0 - 1e-9)); e <= static_cast<int>(std::floor(x1 + 1e-9));
         ++e)
      xt.emplace_back(std::pow(10.0, e), "1e" + std::to_string(e));
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double v = x0 + (x1 - x0) * i / 4;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      xt.emplace_back(v, buf);
    }
  }
  for (const auto &[v, label]: xt) {
    const double x = sx(v);
    o += "<line x1=\"" + px(x) + "\" y1=\"" + px(kH - kB) + "\" x2=\"" + px(x) + "\" y2=\""
         + px(kH - kB + 5) + "\" stroke=\"#000000\"/>\n";
    o += "<text x=\"" + px(x) + "\" y=\"" + px(kH - kB + 18) + "\" text-anchor=\"middle\">" + label
         + "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y0 + (y1 - y0) * i / 4;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    o += "<line x1=\"" + px(kL - 5) + "\" y1=\"" + px(sy(v)) + "\" x2=\"" + px(kL) + "\" y2=\""
         + px(sy(v)) + "\" stroke=\"#000000\"/>\n";
    o += "<text x=\"" + px(kL - 8) + "\" y=\"" + px(sy(v) + 4) + "\" text-anchor=\"end\">" + buf
         + "</text>\n";
  }
  o += "<text x=\"" + px((kL + kW - kR) / 2) + "\" y=\"" + px(kH - 15)
       + "\" text-anchor=\"middle\">" + detail::xml_escape(spec.x_label) + "</text>\n";
  o += "<text x=\"20\" y=\"" + px((kT + kH - kB) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       + px((kT + kH - kB) / 2) + ")\">" + detail::xml_escape(spec.y_label) + "</text>\n";
  o += "<text x=\"" + px(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       + detail::xml_escape(spec.title) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries &s = series[k];
    const std::string color = detail::kPalette[k % detail::kPalette.size()];
    std::vector<PlotPoint> pts;
    for (const PlotPoint &p: s.points)
      if (std::isfinite(p.x) && std::isfinite(p.y) && (!spec.log_x || p.x > 0))
        pts.push_back(p);
    if (pts.size() == 1) {
      o += "<circle cx=\"" + px(sx(pts[0].x)) + "\" cy=\"" + px(sy(pts[0].y)) + "\" r=\"4\" fill=\""
           + color + "\"/>\n";
    }
    // consecutive segments of the same style are merged into one polyline
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
      const bool solid = pts[i].in_range && pts[i + 1].in_range;
      std::string poly = px(sx(pts[i].x)) + "," + px(sy(pts[i].y));
      std::size_t j = i + 1;
      while (true) {
        poly += " " + px(sx(pts[j].x)) + "," + px(sy(pts[j].y));
        if (j + 1 >= pts.size() || (pts[j].in_range && pts[j + 1].in_range) != solid)
          break;
        ++j;
      }
      o += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color
           + "\" stroke-width=\"2\"" + (solid ? "" : " stroke-dasharray=\"6 4\"") + "/>\n";
      i = j;
    }
    const double ly = kT + 10 + 18.0 * static_cast<double>(k);
    o += "<line x1=\"" + px(kW - kR + 15) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(kW - kR + 40)
         + "\" y2=\"" + px(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + px(kW - kR + 46) + "\" y=\"" + px(ly + 4) + "\">" + detail::xml_escape(s.name)
         + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace molscale
