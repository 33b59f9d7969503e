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

#pragma once

#include <string>
#include <vector>

namespace slotprop {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Parses a CSV whose header names `x_column` and `y_column`; throws FormatError
/// naming a missing column or the first malformed row.
std::vector<CurvePoint> parse_curve_csv(const std::string& text, const std::string& x_column = "AN",
                                        const std::string& y_column = "AR");

/// Self-contained SVG line chart. Output depends only on the points.
std::string render_svg(const std::vector<CurvePoint>& points, const std::string& x_label, const std::string& y_label);

}  // namespace slotprop
