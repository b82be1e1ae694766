#pragma once

#include <string>
#include <vector>

namespace rcmc {

/// Minimal line-chart writer: log-x axis, linear or log y, a few series.
/// Deliberately dependency-free; enough for the rho-sweep diagnostics plots.
struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;
};

struct SvgChart {
  std::string title;
  std::string x_label, y_label;
  bool log_x = true;
  bool log_y = false;
  int width = 720, height = 480;
  std::vector<SvgSeries> series;

  std::string render() const;
  void save(const std::string& path) const;
};

}  // namespace rcmc
