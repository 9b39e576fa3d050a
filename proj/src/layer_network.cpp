#include "spillnet/layer_network.hpp"

#include <cmath>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"

namespace spillnet::net {

Adjacency threshold_pvalues(const econ::PValueMatrix& pvals, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
    const int n = pvals.size();
    Adjacency adj;
    adj.layer = pvals.layer;
    adj.window = pvals.window;
    adj.theta = theta;
    adj.entries = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double p = pvals.entries(i, j);
            if (!std::isnan(p) && p <= theta) adj.entries(i, j) = 1;
        }
    return adj;
}

Eigen::VectorXd node_degree(const Eigen::MatrixXi& entries, DegreeMode mode) {
    const int n = static_cast<int>(entries.rows());
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        double in = entries.row(i).sum();
        double out = entries.col(i).sum();
        switch (mode) {
            case DegreeMode::In: deg(i) = in; break;
            case DegreeMode::Out: deg(i) = out; break;
            case DegreeMode::Total: deg(i) = in + out; break;
        }
    }
    return deg;
}

DegreeSeries degree_feature_series(const std::vector<Eigen::MatrixXi>& per_window,
                                   const std::vector<int>& window_starts,
                                   std::string feature_name, DegreeMode mode,
                                   DegreeAggregation agg) {
    if (per_window.empty()) throw DataError("degree_feature_series: empty window set");
    if (per_window.size() != window_starts.size())
        throw DataError("degree_feature_series: window index mismatch");
    if (window_starts.size() > 1) {
        const int stride = window_starts[1] - window_starts[0];
        if (stride <= 0) throw DataError("degree_feature_series: windows not increasing");
        for (std::size_t k = 1; k < window_starts.size(); ++k)
            if (window_starts[k] - window_starts[k - 1] != stride)
                throw DataError("degree_feature_series: windows not consecutive");
    }

    DegreeSeries series;
    series.feature_name = std::move(feature_name);
    series.windows = window_starts;
    series.values.reserve(per_window.size());
    for (const auto& entries : per_window) {
        Eigen::VectorXd deg = node_degree(entries, mode);
        double v = deg.sum();
        if (agg == DegreeAggregation::Mean && deg.size() > 0) v /= deg.size();
        series.values.push_back(v);
    }
    return series;
}

void write_adjacency_csv(const Adjacency& adj, const std::string& path) {
    csv::write_matrix(adj.entries, path);
}

void write_degree_csv(const DegreeSeries& series, const std::string& path) {
    csv::write_series(path, "window_start,value", series.windows, series.values);
}

} // namespace spillnet::net
