#pragma once

#include <string>
#include <vector>

#include "prl/tensor/matrix.hpp"

namespace prl::harness::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Bar {
  std::string label;
  double value = 0.0;
  double low = 0.0;   // whisker ends; NaN draws no whisker
  double high = 0.0;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars);

/// Diverging colour map: red for lo, white for 0, blue for hi.
std::string heatmap(const std::string& title, const Matrix& m, double lo = -1.0, double hi = 1.0);

std::string escape(const std::string& s);

}  // namespace prl::harness::svg
