#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spillnet/econometrics.hpp"

namespace spillnet::net {

// Sparse 0/1 relation matrix for one layer and window; entry(i, j) = 1 means
// "j Granger-causes i" at the significance threshold theta.
struct Adjacency {
    Eigen::MatrixXi entries;
    market::Layer layer = market::Layer::Price;
    int window = 0;
    double theta = 0.05;

    int size() const { return static_cast<int>(entries.rows()); }
};

// In = edges into a node (row sum), Out = edges out of it (column sum),
// Total = both directions counted once each.
enum class DegreeMode { In, Out, Total };
enum class DegreeAggregation { Mean, Sum };

struct DegreeSeries {
    std::string feature_name;
    std::vector<double> values;
    std::vector<int> windows; // aligned window start indices
};

// R_ij = 1 iff p_ij <= theta; NaN cells and the diagonal become 0.
Adjacency threshold_pvalues(const econ::PValueMatrix& pvals, double theta);

Eigen::VectorXd node_degree(const Eigen::MatrixXi& entries,
                            DegreeMode mode = DegreeMode::Total);

// One feature value per window: the cross-sectional mean (or sum) of node
// degrees. Windows must advance by a constant positive stride.
DegreeSeries degree_feature_series(const std::vector<Eigen::MatrixXi>& per_window,
                                   const std::vector<int>& window_starts,
                                   std::string feature_name,
                                   DegreeMode mode = DegreeMode::Total,
                                   DegreeAggregation agg = DegreeAggregation::Mean);

void write_adjacency_csv(const Adjacency& adj, const std::string& path);
void write_degree_csv(const DegreeSeries& series, const std::string& path);

} // namespace spillnet::net
