#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cabinsim/report.hpp"

namespace cabinsim {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), sorted by x
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Rounds a span to a 1/2/5 ladder value, for tick spacing.
inline double nice_step(double span, int target_ticks) {
  if (span <= 0.0) return 1.0;
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double step = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

/// Writes a line chart of all series. Non-finite y values are dropped.
inline void write_line_chart_svg(std::ostream& os, const std::string& title,
                                 const std::string& x_label, const std::string& y_label,
                                 const std::vector<PlotSeries>& series) {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool any = false;
  for (const PlotSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      } else {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (!any) throw std::runtime_error("plot has no finite data points");
  if (x1 - x0 <= 0) x1 = x0 + 1;
  if (y1 - y0 <= 0) y1 = y0 + 1;
  const double pad_y = 0.05 * (y1 - y0);
  y0 -= pad_y;
  y1 += pad_y;

  const int W = 920, H = 520;
  const int ml = 80, mr = 180, mt = 50, mb = 60;
  const double pw = W - ml - mr, ph = H - mt - mb;
  const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return mt + ph - (y - y0) / (y1 - y0) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">"
     << title << "</text>\n";

  // Gridlines and ticks.
  const double xs = detail::nice_step(x1 - x0, 8);
  const double ys = detail::nice_step(y1 - y0, 6);
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
    os << "<line x1=\"" << detail::fmt(px(x)) << "\" y1=\"" << mt << "\" x2=\""
       << detail::fmt(px(x)) << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << detail::fmt(px(x)) << "\" y=\"" << mt + ph + 16
       << "\" text-anchor=\"middle\">" << detail::fmt(x) << "</text>\n";
  }
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
    os << "<line x1=\"" << ml << "\" y1=\"" << detail::fmt(py(y)) << "\" x2=\"" << ml + pw
       << "\" y2=\"" << detail::fmt(py(y)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << detail::fmt(py(y) + 4)
       << "\" text-anchor=\"end\">" << detail::fmt(y) << "</text>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << detail::fmt(pw)
     << "\" height=\"" << detail::fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
        "20 "
     << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = detail::series_color(i);
    std::string path;
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      path += first ? "M" : "L";
      path += detail::fmt(px(x)) + "," + detail::fmt(py(y)) + " ";
      first = false;
    }
    if (path.empty()) continue;
    os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.6\"/>\n";
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      os << "<circle cx=\"" << detail::fmt(px(x)) << "\" cy=\"" << detail::fmt(py(y))
         << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    }
    const double ly = mt + 16 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << detail::fmt(ly - 4) << "\" x2=\""
       << ml + pw + 34 << "\" y2=\"" << detail::fmt(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << detail::fmt(ly)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].label << "</text>\n";
  }
  os << "</svg>\n";
}

/// Renders the two standard charts from a LinkReport CSV: delay spread per
/// seat (one series per receiver) and SINR per seat (one series per
/// receiver and combiner). Returns the written paths.
inline std::vector<std::string> plot_reports(const std::string& report_csv,
                                             const std::string& out_dir) {
  const std::vector<LinkReportRow> rows = read_link_report_csv(report_csv);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Delay spread: combiner rows duplicate it, keep one point per
  // (receiver, seat).
  std::map<std::string, std::map<int, double>> delay_by_rx;
  std::map<std::pair<std::string, std::string>, std::map<int, double>> sinr_by_series;
  for (const LinkReportRow& r : rows) {
    delay_by_rx[r.receiver][r.seat] = r.delay_spread_ns;
    sinr_by_series[{r.receiver, r.combiner}][r.seat] = r.sinr_db;
  }

  std::vector<PlotSeries> delay_series;
  for (const auto& [rx, pts] : delay_by_rx) {
    PlotSeries s;
    s.label = rx;
    for (const auto& [seat, v] : pts) s.points.push_back({static_cast<double>(seat), v});
    delay_series.push_back(std::move(s));
  }
  std::vector<PlotSeries> sinr_series;
  for (const auto& [key, pts] : sinr_by_series) {
    PlotSeries s;
    s.label = key.first + " " + key.second;
    for (const auto& [seat, v] : pts) s.points.push_back({static_cast<double>(seat), v});
    sinr_series.push_back(std::move(s));
  }

  std::vector<std::string> written;
  {
    const fs::path p = fs::path(out_dir) / "delay_spread.svg";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    write_line_chart_svg(os, "Delay spread per seat", "seat", "delay spread [ns]", delay_series);
    written.push_back(p.string());
  }
  {
    const fs::path p = fs::path(out_dir) / "sinr.svg";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    write_line_chart_svg(os, "SINR per seat", "seat", "SINR [dB]", sinr_series);
    written.push_back(p.string());
  }
  return written;
}

}  // namespace cabinsim
