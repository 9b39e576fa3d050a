#include "spillnet/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::forest {

int ForestConfig::resolved_mtry(int n_features) const {
    if (mtry == 0) return (n_features + 2) / 3;
    return mtry;
}

void ForestConfig::validate(int n_features) const {
    if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (min_samples_leaf < 1) throw ConfigError("forest: min_samples_leaf must be >= 1");
    if (max_depth < 0) throw ConfigError("forest: max_depth must be >= 0");
    const int m = resolved_mtry(n_features);
    if (m < 1 || m > n_features)
        throw ConfigError("forest: mtry must lie in [1, n_features]");
}

double RegressionTree::predict(const Eigen::RowVectorXd& row) const {
    int node = 0;
    while (!nodes[node].is_leaf())
        node = row(nodes[node].feature) <= nodes[node].threshold ? nodes[node].left
                                                                 : nodes[node].right;
    return nodes[node].value;
}

double Forest::predict(const Eigen::RowVectorXd& row) const {
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.predict(row);
    return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd Forest::predict_rows(const Eigen::MatrixXd& rows) const {
    Eigen::VectorXd out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const Eigen::RowVectorXd row = rows.row(i);
        out(i) = predict(row);
    }
    return out;
}

namespace {

struct Builder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const ForestConfig& config;
    std::mt19937_64& rng;
    int mtry;
    RegressionTree tree;

    std::vector<int> feature_pool;
    std::vector<std::pair<double, double>> sorted; // (x_f, y) within a node

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    // Candidate features in ascending index order, so exact gain ties fall
    // to the lowest feature index.
    std::vector<int> sample_features() {
        const int k = static_cast<int>(x.cols());
        if (mtry >= k) {
            std::vector<int> all(k);
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        // partial Fisher-Yates over the persistent pool
        std::vector<int> chosen;
        chosen.reserve(mtry);
        for (int i = 0; i < mtry; ++i) {
            std::uniform_int_distribution<int> pick(i, k - 1);
            std::swap(feature_pool[i], feature_pool[pick(rng)]);
            chosen.push_back(feature_pool[i]);
        }
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    Split best_split(const std::vector<int>& indices) {
        const int m = static_cast<int>(indices.size());
        double sum = 0.0;
        for (int idx : indices) sum += y(idx);
        const double parent_score = sum * sum / m;

        Split best;
        for (int f : sample_features()) {
            sorted.clear();
            sorted.reserve(m);
            for (int idx : indices) sorted.emplace_back(x(idx, f), y(idx));
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0;
            for (int s = 1; s < m; ++s) {
                left_sum += sorted[s - 1].second;
                if (sorted[s - 1].first == sorted[s].first) continue;
                if (s < config.min_samples_leaf || m - s < config.min_samples_leaf) continue;
                const double right_sum = sum - left_sum;
                const double gain =
                    left_sum * left_sum / s + right_sum * right_sum / (m - s) - parent_score;
                if (gain > best.gain) {
                    best.feature = f;
                    best.threshold = 0.5 * (sorted[s - 1].first + sorted[s].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int build(const std::vector<int>& indices, int depth) {
        const int m = static_cast<int>(indices.size());
        double sum = 0.0, vmin = y(indices.front()), vmax = vmin;
        for (int idx : indices) {
            sum += y(idx);
            vmin = std::min(vmin, y(idx));
            vmax = std::max(vmax, y(idx));
        }

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_id].value = sum / m;
        if (depth >= config.max_depth || m < 2 * config.min_samples_leaf || vmin == vmax)
            return node_id;

        Split split = best_split(indices);
        if (split.feature < 0 || !(split.gain > 0.0)) return node_id;

        std::vector<int> left, right;
        left.reserve(m);
        right.reserve(m);
        for (int idx : indices)
            (x(idx, split.feature) <= split.threshold ? left : right).push_back(idx);

        tree.impurity_decrease[split.feature] += split.gain;
        const int left_id = build(left, depth + 1);
        const int right_id = build(right, depth + 1);
        tree.nodes[node_id].feature = split.feature;
        tree.nodes[node_id].threshold = split.threshold;
        tree.nodes[node_id].gain = split.gain;
        tree.nodes[node_id].left = left_id;
        tree.nodes[node_id].right = right_id;
        return node_id;
    }
};

} // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                        const ForestConfig& config, std::mt19937_64& rng) {
    const int m = static_cast<int>(features.rows());
    const int k = static_cast<int>(features.cols());
    if (targets.size() != m) throw DataError("fit_tree: feature/target row mismatch");
    config.validate(k);
    if (m < 2 * config.min_samples_leaf)
        throw DataError("fit_tree: need at least 2 * min_samples_leaf samples, got " +
                        std::to_string(m));

    Builder builder{features, targets, config, rng, config.resolved_mtry(k), {}, {}, {}};
    builder.tree.impurity_decrease.assign(k, 0.0);
    builder.feature_pool.resize(k);
    std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);

    std::vector<int> all(m);
    std::iota(all.begin(), all.end(), 0);
    builder.build(all, 0);
    return std::move(builder.tree);
}

Forest fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                  const ForestConfig& config) {
    const int m = static_cast<int>(features.rows());
    const int k = static_cast<int>(features.cols());
    config.validate(k);

    Forest forest;
    forest.n_features = k;
    forest.trees.reserve(config.n_trees);
    for (int t = 0; t < config.n_trees; ++t) {
        std::mt19937_64 rng = make_rng(config.seed, static_cast<std::uint64_t>(t));
        if (config.bootstrap) {
            Eigen::MatrixXd bx(m, k);
            Eigen::VectorXd by(m);
            std::uniform_int_distribution<int> pick(0, m - 1);
            for (int i = 0; i < m; ++i) {
                int idx = pick(rng);
                bx.row(i) = features.row(idx);
                by(i) = targets(idx);
            }
            forest.trees.push_back(fit_tree(bx, by, config, rng));
        } else {
            forest.trees.push_back(fit_tree(features, targets, config, rng));
        }
    }
    return forest;
}

Eigen::VectorXd importances(const Forest& forest) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(forest.n_features);
    for (const auto& tree : forest.trees)
        for (int f = 0; f < forest.n_features; ++f) total(f) += tree.impurity_decrease[f];
    total /= static_cast<double>(forest.trees.size());
    const double sum = total.sum();
    if (sum > 0.0) total /= sum;
    return total;
}

const char* relation_tag(Relation r) {
    switch (r) {
        case Relation::PriceToReturn: return "price_to_return";
        case Relation::TradingValueToPrice: return "trading_value_to_price";
        case Relation::TradingValueToReturn: return "trading_value_to_return";
    }
    return "?";
}

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::PriceToReturn: return "price -> return";
        case Relation::TradingValueToPrice: return "trading value -> price";
        case Relation::TradingValueToReturn: return "trading value -> return";
    }
    return "?";
}

ImportanceMatrix interlayer_importance(const std::vector<std::vector<double>>& source_layer,
                                       const std::vector<std::vector<double>>& target_layer,
                                       int lag, const ForestConfig& config) {
    if (lag < 1) throw ConfigError("interlayer_importance: lag must be >= 1");
    const int n = static_cast<int>(source_layer.size());
    if (n == 0 || static_cast<int>(target_layer.size()) != n)
        throw DataError("interlayer_importance: source/target node counts differ");
    const int windows = static_cast<int>(source_layer.front().size());
    for (const auto& s : source_layer)
        if (static_cast<int>(s.size()) != windows)
            throw DataError("interlayer_importance: source windows not aligned");
    for (const auto& s : target_layer)
        if (static_cast<int>(s.size()) != windows)
            throw DataError("interlayer_importance: target windows not aligned");

    const int m = windows - lag;
    if (m < 2 * config.min_samples_leaf)
        throw DataError("interlayer_importance: too few windows (" + std::to_string(windows) +
                        ") for lag " + std::to_string(lag));

    Eigen::MatrixXd design(m, n);
    for (int row = 0; row < m; ++row)
        for (int j = 0; j < n; ++j) design(row, j) = source_layer[j][row];

    ImportanceMatrix matrix;
    matrix.entries = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd targets(m);
        for (int row = 0; row < m; ++row) targets(row) = target_layer[i][row + lag];
        ForestConfig row_config = config;
        row_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        Forest forest = fit_forest(design, targets, row_config);
        matrix.entries.row(i) = importances(forest).transpose();
    }
    return matrix;
}

InterlayerAdjacency threshold_importance(const ImportanceMatrix& imp, double zeta) {
    if (zeta < 0.0) throw ConfigError("zeta must be >= 0");
    InterlayerAdjacency adj;
    adj.relation = imp.relation;
    adj.zeta = zeta;
    adj.window = imp.window;
    adj.entries = (imp.entries.array() > zeta).cast<int>();
    return adj;
}

void write_importance_csv(const ImportanceMatrix& imp, const std::string& path) {
    csv::write_matrix(imp.entries, path);
}

void write_interlayer_csv(const InterlayerAdjacency& adj, const std::string& path) {
    csv::write_matrix(adj.entries, path);
}

} // namespace spillnet::forest
