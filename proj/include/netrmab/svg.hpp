#pragma once

// Minimal SVG charts for experiment summaries.

#include <string>
#include <vector>

namespace netrmab::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-widths, same length as y
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Polylines with markers and error bars, linear axes with five ticks.
std::string render(const LineChart& chart);

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;   // clusters along the x axis
  std::vector<std::string> labels;   // one bar per label in every group
  std::vector<std::vector<double>> values;  // [group][label]
  std::vector<std::vector<double>> errors;  // [group][label], may be empty
};

std::string render(const BarChart& chart);

}  // namespace netrmab::svg
