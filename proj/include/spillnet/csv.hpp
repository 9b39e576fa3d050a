#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace spillnet::csv {

// 12 significant digits; the fixed format used by every numeric CSV artifact.
std::string format_value(double v);

std::vector<std::string> split_line(const std::string& line, char sep = ',');

// Dense real matrix, one row per line. NaN entries are written as empty
// fields and empty fields read back as NaN.
void write_matrix(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix(const std::string& path);

// 0/1 integer matrix.
void write_matrix(const Eigen::MatrixXi& m, const std::string& path);

// Two-column series file with a header line.
void write_series(const std::string& path, const std::string& header,
                  const std::vector<int>& keys, const std::vector<double>& values);

} // namespace spillnet::csv
