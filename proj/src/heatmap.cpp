#include "spillnet/heatmap.hpp"

#include <cmath>
#include <fstream>

#include "spillnet/error.hpp"

namespace spillnet {

void write_heatmap(const Eigen::MatrixXd& matrix, const std::string& path) {
    if (matrix.size() == 0) throw DataError("write_heatmap: empty matrix");
    if (matrix.hasNaN()) throw NumericError("write_heatmap: NaN entries");

    const double lo = matrix.minCoeff();
    const double hi = matrix.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw NumericError("write_heatmap: non-finite entries");
    const double span = hi - lo;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << "P6\n" << matrix.cols() << ' ' << matrix.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            const double t = span > 0.0 ? (matrix(i, j) - lo) / span : 0.0;
            const unsigned char fade =
                static_cast<unsigned char>(std::lround(255.0 * (1.0 - t)));
            const unsigned char pixel[3] = {255, fade, fade};
            out.write(reinterpret_cast<const char*>(pixel), 3);
        }
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

} // namespace spillnet
