// Copyright 2026 The SkimNet Authors
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

namespace skimnet::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 640.0;
  double height = 400.0;
};

/// Standalone SVG with axes, ticks, a polyline plus markers per series and a
/// legend. The output depends only on the inputs.
std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace skimnet::cli
