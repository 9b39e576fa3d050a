#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace spillnet::forest {

struct ForestConfig {
    int n_trees = 200;
    int max_depth = 10;
    int min_samples_leaf = 5;
    int mtry = 0; // 0 = ceil(n_features / 3)
    bool bootstrap = true;
    std::uint64_t seed = 0;

    bool operator==(const ForestConfig&) const = default;

    int resolved_mtry(int n_features) const;
    void validate(int n_features) const;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0; // leaf mean
    double gain = 0.0;  // impurity decrease at this split
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    std::vector<double> impurity_decrease; // accumulated per feature

    double predict(const Eigen::RowVectorXd& row) const;
};

struct Forest {
    std::vector<RegressionTree> trees;
    int n_features = 0;

    double predict(const Eigen::RowVectorXd& row) const;
    Eigen::VectorXd predict_rows(const Eigen::MatrixXd& rows) const;
};

// Greedy CART: best split by variance reduction over mtry sampled features,
// thresholds at midpoints of consecutive sorted unique values, ties broken
// by lowest feature index then lowest threshold.
RegressionTree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                        const ForestConfig& config, std::mt19937_64& rng);

// Bagged trees on bootstrap resamples; per-tree RNG derived from the master
// seed with a fixed counter scheme, so results do not depend on fit order.
Forest fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                  const ForestConfig& config);

// Mean decrease in impurity per feature, averaged over trees and normalized
// to sum 1; all-zero when no tree ever split.
Eigen::VectorXd importances(const Forest& forest);

enum class Relation { PriceToReturn, TradingValueToPrice, TradingValueToReturn };
const char* relation_tag(Relation r);  // e.g. "trading_value_to_return"
const char* relation_name(Relation r); // e.g. "trading value -> return"

// entry(i, j) = importance of source node j's lagged series when predicting
// target node i; each row sums to 1 when its forest split, else stays zero.
struct ImportanceMatrix {
    Relation relation = Relation::TradingValueToReturn;
    int window = 0;
    Eigen::MatrixXd entries;

    int size() const { return static_cast<int>(entries.rows()); }
};

struct InterlayerAdjacency {
    Relation relation = Relation::TradingValueToReturn;
    double zeta = 0.0;
    int window = 0;
    Eigen::MatrixXi entries;
};

// Per target node i, fits a forest predicting target_i at window t from all
// source nodes at window t - lag, and stores that forest's importance vector
// as row i.
ImportanceMatrix interlayer_importance(const std::vector<std::vector<double>>& source_layer,
                                       const std::vector<std::vector<double>>& target_layer,
                                       int lag, const ForestConfig& config);

// S_ij = 1 iff importance_ij > zeta.
InterlayerAdjacency threshold_importance(const ImportanceMatrix& imp, double zeta);

void write_importance_csv(const ImportanceMatrix& imp, const std::string& path);
void write_interlayer_csv(const InterlayerAdjacency& adj, const std::string& path);

} // namespace spillnet::forest
