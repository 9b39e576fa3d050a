#include "spillnet/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spillnet/error.hpp"

namespace spillnet::csv {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

static std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    return out;
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            if (!std::isnan(m(i, j))) out << format_value(m(i, j));
        }
        out << '\n';
    }
}

void write_matrix(const Eigen::MatrixXi& m, const std::string& path) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        auto fields = split_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                try {
                    std::size_t pos = 0;
                    double v = std::stod(f, &pos);
                    if (pos != f.size()) throw std::invalid_argument(f);
                    row.push_back(v);
                } catch (const std::exception&) {
                    throw DataError("'" + path + "': bad numeric field '" + f + "'");
                }
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("'" + path + "': ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("'" + path + "': empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_series(const std::string& path, const std::string& header,
                  const std::vector<int>& keys, const std::vector<double>& values) {
    if (keys.size() != values.size()) throw DataError("series keys/values length mismatch");
    std::ofstream out = open_out(path);
    out << header << '\n';
    for (std::size_t i = 0; i < keys.size(); ++i)
        out << keys[i] << ',' << format_value(values[i]) << '\n';
}

} // namespace spillnet::csv
