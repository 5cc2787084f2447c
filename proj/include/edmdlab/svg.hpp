// svg.hpp
// Dependency-light SVG 1.1 line/scatter charts with optional log axes.
// Static plot output only.

#pragma once

#include <string>
#include <vector>

namespace edmdlab::cli {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  bool markers_only = false;  // scatter instead of polyline
};

class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label);

  void set_log_x(bool on) { log_x_ = on; }
  void set_log_y(bool on) { log_y_ = on; }
  void add_series(SvgSeries series);

  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  std::string title_, x_label_, y_label_;
  bool log_x_ = false, log_y_ = false;
  std::vector<SvgSeries> series_;
};

}  // namespace edmdlab::cli
