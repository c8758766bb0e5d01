#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gtsec {

// Minimal self-contained line chart: one polyline per series over a shared
// step axis, with axis ticks and a legend.  Rows of `series` are series,
// columns are steps.
std::string line_chart_svg(const std::string& title,
                           const std::vector<std::string>& names,
                           const Eigen::MatrixXd& series);

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<std::string>& names,
                      const Eigen::MatrixXd& series);

}  // namespace gtsec
