// SPDX-License-Identifier: Apache-2.0
//
// Deterministic, locale-independent serialization: sweep CSVs and a
// dependency-free SVG line plot with a log-scaled rate axis.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hsqkd/errors.hpp"
#include "hsqkd/optimizer.hpp"

namespace hsqkd::cli {

/// Scientific notation with 12 significant digits via to_chars (never
/// consults the locale).
inline std::string format_sci(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::scientific, 11);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_opt(const std::optional<double>& v) {
  return v ? format_sci(*v) : std::string();
}

inline constexpr const char* kSweepCsvHeader =
    "loss_db,mu_opt,rate,gain,qber,delta,p_click,y0_l,y1_l,e1_u";

inline std::string sweep_csv_row(const SweepRecord& rec) {
  std::string row;
  row += format_sci(rec.loss_db);
  row += ',';
  row += format_opt(rec.mu_opt);
  row += ',';
  row += format_sci(rec.rate);
  row += ',';
  row += format_sci(rec.gain);
  row += ',';
  row += format_sci(rec.qber);
  row += ',';
  row += format_opt(rec.delta);
  row += ',';
  row += format_opt(rec.p_click);
  row += ',';
  row += format_opt(rec.y0_lower);
  row += ',';
  row += format_opt(rec.y1_lower);
  row += ',';
  row += format_opt(rec.e1_upper);
  return row;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& rec : records) {
    out += sweep_csv_row(rec);
    out += '\n';
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::io_write, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw error(errc::io_write, "failed writing " + path);
}

/// One plottable curve; points with y <= 0 break the line (log axis).
struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string short_num(double v) {
  std::array<char, 32> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 6);
  return std::string(buf.data(), res.ptr);
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#17becf", "#8c564b", "#7f7f7f"};

}  // namespace detail

/// Hand-rolled SVG line plot: linear x, log10 y, decade ticks, legend.
inline std::string svg_line_plot(const std::string& title, const std::string& x_label,
                                 const std::string& y_label,
                                 const std::vector<PlotSeries>& series,
                                 double y_floor = 1e-12) {
  constexpr double kW = 720, kH = 480, kL = 72, kR = 24, kT = 36, kB = 52;
  const double plot_w = kW - kL - kR;
  const double plot_h = kH - kT - kB;

  double x_min = 0.0, x_max = 1.0, y_max = 1.0;
  double y_min = y_floor;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x_min = x_max = x;
        any = true;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      if (y > y_floor) {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  if (x_max <= x_min) x_max = x_min + 1.0;
  const int dec_lo = int(std::floor(std::log10(std::max(y_min, 1e-300))));
  const int dec_hi = int(std::ceil(std::log10(std::max(y_max, y_min * 10))));
  const double ly_lo = dec_lo, ly_hi = std::max(double(dec_hi), dec_lo + 1.0);

  const auto px = [&](double x) { return kL + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto py = [&](double y) {
    const double ly = std::log10(std::max(y, 1e-300));
    return kT + (ly_hi - ly) / (ly_hi - ly_lo) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::short_num(kW) +
         "\" height=\"" + detail::short_num(kH) + "\" viewBox=\"0 0 " + detail::short_num(kW) +
         " " + detail::short_num(kH) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::short_num(kW / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";

  // Frame
  svg += "<rect x=\"" + detail::short_num(kL) + "\" y=\"" + detail::short_num(kT) +
         "\" width=\"" + detail::short_num(plot_w) + "\" height=\"" + detail::short_num(plot_h) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  // X ticks: a step that yields <= 12 labels from {1,2,5,10,...}
  double x_step = 1.0;
  while ((x_max - x_min) / x_step > 12.0) {
    if ((x_max - x_min) / (x_step * 2) <= 12.0) x_step *= 2;
    else if ((x_max - x_min) / (x_step * 5) <= 12.0) x_step *= 5;
    else x_step *= 10;
  }
  for (double x = std::ceil(x_min / x_step) * x_step; x <= x_max + 1e-9; x += x_step) {
    const double gx = px(x);
    svg += "<line x1=\"" + detail::short_num(gx) + "\" y1=\"" + detail::short_num(kT + plot_h) +
           "\" x2=\"" + detail::short_num(gx) + "\" y2=\"" +
           detail::short_num(kT + plot_h + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::short_num(gx) + "\" y=\"" +
           detail::short_num(kT + plot_h + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::short_num(x) + "</text>\n";
  }
  svg += "<text x=\"" + detail::short_num(kL + plot_w / 2) + "\" y=\"" +
         detail::short_num(kH - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + x_label +
         "</text>\n";

  // Y ticks: one per decade, gridlines included
  const int decades = int(ly_hi - ly_lo);
  const int dec_step = decades > 12 ? (decades + 11) / 12 : 1;
  for (int d = int(ly_lo); d <= int(ly_hi); d += dec_step) {
    const double gy = py(std::pow(10.0, d));
    svg += "<line x1=\"" + detail::short_num(kL) + "\" y1=\"" + detail::short_num(gy) +
           "\" x2=\"" + detail::short_num(kL + plot_w) + "\" y2=\"" + detail::short_num(gy) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::short_num(kL - 8) + "\" y=\"" + detail::short_num(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" +
           std::to_string(d) + "</text>\n";
  }
  svg += "<text x=\"18\" y=\"" + detail::short_num(kT + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " + detail::short_num(kT + plot_h / 2) + ")\">" + y_label +
         "</text>\n";

  // Series polylines, broken at non-positive values
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = detail::kPalette[s % detail::kPalette.size()];
    std::string points;
    const auto flush = [&]() {
      if (!points.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.6\" points=\"" + points + "\"/>\n";
        points.clear();
      }
    };
    for (const auto& [x, y] : series[s].points) {
      if (y > y_floor) {
        points += detail::short_num(px(x)) + "," + detail::short_num(py(y)) + " ";
      } else {
        flush();
      }
    }
    flush();
    // Legend entry
    const double ly = kT + 14 + 16 * double(s);
    svg += "<line x1=\"" + detail::short_num(kL + plot_w - 150) + "\" y1=\"" +
           detail::short_num(ly) + "\" x2=\"" + detail::short_num(kL + plot_w - 126) +
           "\" y2=\"" + detail::short_num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::short_num(kL + plot_w - 120) + "\" y=\"" +
           detail::short_num(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
           series[s].label + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace hsqkd::cli
