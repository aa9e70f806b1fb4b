#pragma once

#include <string>
#include <vector>

namespace onc::plot {

struct Series {
  std::string name;
  std::vector<double> y;
  std::vector<double> band;  // optional half-width; empty for a plain line
  std::string color = "#1f77b4";
};

// Self-contained SVG documents; no external fonts or scripts.
std::string line_chart(const std::string& title, const std::vector<double>& x,
                       const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label);

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::vector<double>& errors,
                      const std::string& y_label);

}  // namespace onc::plot
