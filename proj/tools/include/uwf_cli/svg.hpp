#pragma once

#include <string>
#include <vector>

namespace uwf::cli {

struct CurveTable {
  std::string x_label;
  std::vector<std::string> series;
  std::vector<double> x;
  std::vector<std::vector<double>> y;  // y[s][i]; NaN marks a missing value
};

/// First column is x, every further column is one series. Empty cells become NaN.
CurveTable parse_curves_csv(const std::string& text);
std::string render_svg(const CurveTable& t, int width = 640, int height = 400);

}  // namespace uwf::cli
