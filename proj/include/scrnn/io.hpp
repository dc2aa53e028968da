// Copyright 2026 The SCRNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run manifests and a small SVG line-plot writer.

#pragma once

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/spikes.hpp"

namespace scrnn {

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    SCRNN_REQUIRE(static_cast<bool>(out), ValidationError, "cannot write " + tmp.string());
    out << text;
    out.flush();
    SCRNN_REQUIRE(static_cast<bool>(out), ValidationError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct RunManifest {
  std::string command;
  std::string config;  // config echo
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const {
    return {{"command", command}, {"config", config},   {"seed", seed},
            {"inputs", inputs},   {"outputs", outputs}, {"version", version},
            {"wall_seconds", wall_seconds}};
  }

  void write(const std::filesystem::path& dir) const { write_file_atomic(dir / "manifest.json", to_json().dump(2) + "\n"); }
};

struct PlotSeries {
  std::string name;
  std::string color;
  std::vector<double> y;
};

struct PlotPanel {
  std::string y_label;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_number(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << v;
  return s.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

}  // namespace detail

/// Stacked line-plot panels sharing the x axis. SVG 1.1, no scripts.
inline std::string render_svg(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                              const std::vector<PlotPanel>& panels) {
  using detail::svg_number;
  constexpr double width = 900.0, panel_h = 220.0, left = 70.0, right = 20.0, top = 40.0, gap = 50.0;
  const double height = top + static_cast<double>(panels.size()) * (panel_h + gap) + 10.0;
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << svg_number(width) << "\" height=\""
    << svg_number(height) << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << svg_number(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">"
    << detail::xml_escape(title) << "</text>\n";
  if (x.empty()) {
    s << "</svg>\n";
    return s.str();
  }
  const double x0 = *std::min_element(x.begin(), x.end());
  double x1 = *std::max_element(x.begin(), x.end());
  if (x1 <= x0) x1 = x0 + 1.0;
  const double plot_w = width - left - right;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double py = top + static_cast<double>(p) * (panel_h + gap);
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    for (const auto& ser : panel.series) {
      for (double v : ser.y) {
        if (std::isfinite(v)) {
          y0 = std::min(y0, v);
          y1 = std::max(y1, v);
        }
      }
    }
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * plot_w; };
    auto sy = [&](double v) { return py + panel_h - (v - y0) / (y1 - y0) * panel_h; };
    s << "<rect x=\"" << svg_number(left) << "\" y=\"" << svg_number(py) << "\" width=\"" << svg_number(plot_w)
      << "\" height=\"" << svg_number(panel_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    s << "<text x=\"" << svg_number(left - 8) << "\" y=\"" << svg_number(py + 10) << "\" text-anchor=\"end\" "
      << "font-family=\"sans-serif\" font-size=\"11\">" << detail::format_double(y1) << "</text>\n";
    s << "<text x=\"" << svg_number(left - 8) << "\" y=\"" << svg_number(py + panel_h) << "\" text-anchor=\"end\" "
      << "font-family=\"sans-serif\" font-size=\"11\">" << detail::format_double(y0) << "</text>\n";
    s << "<text transform=\"translate(16," << svg_number(py + panel_h / 2) << ") rotate(-90)\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(panel.y_label) << "</text>\n";
    double legend_x = left + 10.0;
    for (const auto& ser : panel.series) {
      s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1\" points=\"";
      const std::size_t n = std::min(ser.y.size(), x.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ser.y[i])) continue;
        s << svg_number(sx(x[i])) << ',' << svg_number(sy(ser.y[i])) << ' ';
      }
      s << "\"/>\n";
      s << "<text x=\"" << svg_number(legend_x) << "\" y=\"" << svg_number(py - 6) << "\" fill=\"" << ser.color
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(ser.name) << "</text>\n";
      legend_x += 120.0;
    }
    if (p + 1 == panels.size()) {
      s << "<text x=\"" << svg_number(left) << "\" y=\"" << svg_number(py + panel_h + 16) << "\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << detail::format_double(x0) << "</text>\n";
      s << "<text x=\"" << svg_number(left + plot_w) << "\" y=\"" << svg_number(py + panel_h + 16) << "\" "
        << "text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::format_double(x1) << "</text>\n";
      s << "<text x=\"" << svg_number(left + plot_w / 2) << "\" y=\"" << svg_number(py + panel_h + 30) << "\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(x_label)
        << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace scrnn
