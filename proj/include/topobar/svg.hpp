#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topobar/persistence.hpp"

namespace topobar {

// Horizontal bars on a [0, axis_max] axis, longest bar on top.
std::string barcode_svg(const Barcode& barcode, const std::string& title, double axis_max = kDefaultCap);

// Scatter of the first two coordinate columns, coloured by label. A single
// column is drawn on the x axis.
std::string scatter_svg(const Eigen::MatrixXd& coords, const std::vector<std::string>& ids,
                        const std::vector<std::string>& labels, const std::string& title);

}  // namespace topobar
