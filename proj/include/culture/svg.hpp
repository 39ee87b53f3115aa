// Minimal standalone SVG charts for report artifacts.
#pragma once

#include <string>
#include <vector>

namespace culture::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Point {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  int group = 0;
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);
std::string scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<Point>& points, bool diagonal = false);
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values);

}  // namespace culture::svg
