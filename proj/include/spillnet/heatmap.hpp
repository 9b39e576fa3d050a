#pragma once

#include <Eigen/Dense>
#include <string>

namespace spillnet {

// Binary PPM (P6), one pixel per cell, linear colormap from white at the
// matrix minimum to pure red at the maximum; a constant matrix renders
// all-white. NaN entries are rejected.
void write_heatmap(const Eigen::MatrixXd& matrix, const std::string& path);

} // namespace spillnet
