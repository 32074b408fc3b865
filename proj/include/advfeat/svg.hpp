#pragma once

#include <string>
#include <vector>

#include "advfeat/boundary.hpp"

namespace advfeat {

// Two-color raster of a decision map with dataset projections drawn as
// circles (+1) and crosses (-1), axes labeled v and u.
std::string decision_map_svg(const DecisionMap& map);

struct SweepSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string color = "#1f77b4";
  bool dashed = false;
};

// Polyline chart over a shared x axis; y is clamped to [0, 1] style metrics.
std::string sweep_curves_svg(const std::vector<SweepSeries>& series,
                             const std::string& x_label,
                             const std::string& y_label);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace advfeat
