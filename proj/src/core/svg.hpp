#pragma once

#include <string>
#include <vector>

#include "types.hpp"

namespace aucoder::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  int width = 720;
  int height = 460;
};

// Static line chart; points with x <= 0 are skipped on a log axis.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

struct ComponentView {
  std::string title;
  KeypointArray neutral{};
  KeypointMask mask{};
  Vector displacement;  // 136 rows, interleaved x/y
  double scale = 10.0;
};

// Neutral keypoints in red, displaced keypoints in green, arrows between.
std::string component_plot(const ComponentView& view);

}  // namespace aucoder::svg
