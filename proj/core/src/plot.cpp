// Copyright 2026 The slotprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slotprop/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "slotprop/common.hpp"

namespace slotprop {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

std::vector<CurvePoint> parse_curve_csv(const std::string& text, const std::string& x_column,
                                        const std::string& y_column) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("curve CSV is empty");
  const auto header = split_csv(line);
  const auto xi = std::find(header.begin(), header.end(), x_column);
  const auto yi = std::find(header.begin(), header.end(), y_column);
  if (xi == header.end()) throw FormatError("curve CSV is missing column '" + x_column + "'");
  if (yi == header.end()) throw FormatError("curve CSV is missing column '" + y_column + "'");
  const auto xc = static_cast<std::size_t>(xi - header.begin());
  const auto yc = static_cast<std::size_t>(yi - header.begin());

  std::vector<CurvePoint> points;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    try {
      if (cells.size() <= std::max(xc, yc)) throw std::invalid_argument("short row");
      std::size_t px = 0, py = 0;
      CurvePoint p{std::stod(cells[xc], &px), std::stod(cells[yc], &py)};
      if (px != cells[xc].size() || py != cells[yc].size()) throw std::invalid_argument("junk");
      points.push_back(p);
    } catch (const std::logic_error&) {
      throw FormatError("curve CSV row " + std::to_string(row) + " is malformed");
    }
  }
  if (points.empty()) throw FormatError("curve CSV has no data rows");
  return points;
}

std::string render_svg(const std::vector<CurvePoint>& points, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  double x_min = points.front().x, x_max = points.front().x;
  double y_min = 0.0, y_max = 1.0;
  for (const auto& p : points) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - (y - y_min) / (y_max - y_min) * (kH - kTop - kBottom); };

  std::ostringstream svg;
  char buf[128];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  svg << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kH - kBottom, kW - kRight, kH - kBottom);
  svg << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kTop, kLeft, kH - kBottom);
  svg << buf;
  for (int k = 0; k <= 5; ++k) {
    const double y = y_min + (y_max - y_min) * k / 5.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.2f</text>\n",
                  kLeft - 6, sy(y) + 4, y);
    svg << buf;
    const double x = x_min + (x_max - x_min) * k / 5.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
                  sx(x), kH - kBottom + 16, x);
    svg << buf;
  }
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", sx(points[i].x), sy(points[i].y));
    svg << buf;
  }
  svg << "\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\">", kW / 2,
                kH - 12);
  svg << buf << x_label << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.1f)\">",
                kH / 2, kH / 2);
  svg << buf << y_label << "</text>\n</svg>\n";
  return svg.str();
}

}  // namespace slotprop
