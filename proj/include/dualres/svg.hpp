#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dualres::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> vertical_markers;  // dashed lines at these x values
  bool zero_line = false;
};

struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;  // column centres
  std::vector<double> y;  // row centres
  Eigen::MatrixXd z;      // rows follow y
};

/// Deterministic, self-contained SVG documents (no timestamps, fixed palette).
std::string render(const LinePlot& plot);
std::string render(const Heatmap& map);

}  // namespace dualres::svg
