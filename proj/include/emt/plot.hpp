#pragma once

// Minimal log-log line plots written as standalone SVG.

#include <string>
#include <vector>

namespace emt {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LogLogPlot {
  std::string name;  // file stem
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Points with a non-positive or non-finite coordinate are dropped. Axis
/// ranges snap outward to whole decades. Output depends only on the input.
std::string render_svg(const LogLogPlot& plot);

}  // namespace emt
