#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "spillnet/error.hpp"
#include "spillnet/forest.hpp"
#include "spillnet/rng.hpp"

using namespace spillnet;

namespace {

struct Task {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Task linear_task(std::mt19937_64& rng, int m, int k, double slope, double noise) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Task task;
    task.x.resize(m, k);
    task.y.resize(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) task.x(i, j) = gauss(rng);
        task.y(i) = slope * task.x(i, 0) + noise * gauss(rng);
    }
    return task;
}

} // namespace

TEST_CASE("fit_tree basics") {
    forest::ForestConfig config;
    config.min_samples_leaf = 1;
    config.max_depth = 4;
    config.mtry = 1;

    // constant targets collapse to a single leaf
    Eigen::MatrixXd x(6, 1);
    x << 0, 1, 2, 3, 4, 5;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 7.25);
    std::mt19937_64 rng(1);
    auto tree = forest::fit_tree(x, y, config, rng);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].value == doctest::Approx(7.25));

    // two points, depth 1: a step function split at the midpoint
    Eigen::MatrixXd x2(2, 1);
    x2 << 0, 1;
    Eigen::VectorXd y2(2);
    y2 << 0, 1;
    forest::ForestConfig shallow = config;
    shallow.max_depth = 1;
    auto step = forest::fit_tree(x2, y2, shallow, rng);
    REQUIRE(step.nodes.size() == 3);
    CHECK(step.nodes[0].threshold == doctest::Approx(0.5));
    Eigen::RowVectorXd below(1), above(1);
    below << 0.25;
    above << 0.75;
    CHECK(step.predict(below) == doctest::Approx(0.0));
    CHECK(step.predict(above) == doctest::Approx(1.0));

    CHECK_THROWS_AS(forest::fit_tree(x2, y2, forest::ForestConfig{}, rng), DataError);
}

TEST_CASE("tree structure: internal nodes carry two children and positive gains") {
    std::mt19937_64 rng(2);
    auto task = linear_task(rng, 100, 3, 1.5, 0.5);
    forest::ForestConfig config;
    config.min_samples_leaf = 4;
    std::mt19937_64 tree_rng(9);
    auto tree = forest::fit_tree(task.x, task.y, config, tree_rng);
    REQUIRE(tree.nodes.size() > 1);
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
            CHECK(node.left == -1);
            CHECK(node.right == -1);
        } else {
            REQUIRE(node.left >= 0);
            REQUIRE(node.right >= 0);
            REQUIRE(node.left < static_cast<int>(tree.nodes.size()));
            REQUIRE(node.right < static_cast<int>(tree.nodes.size()));
            CHECK(node.gain > 0.0);
            CHECK(std::isfinite(node.threshold));
        }
    }
}

TEST_CASE("tree training MSE never exceeds target variance") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto task = linear_task(rng, 80, 3, 2.0, 1.0);
        forest::ForestConfig config;
        config.min_samples_leaf = 2;
        config.mtry = 3;
        std::mt19937_64 tree_rng(trial);
        auto tree = forest::fit_tree(task.x, task.y, config, tree_rng);

        double mse = 0.0;
        for (int i = 0; i < 80; ++i) {
            const Eigen::RowVectorXd row = task.x.row(i);
            const double r = tree.predict(row) - task.y(i);
            mse += r * r;
        }
        mse /= 80;
        const double mean = task.y.mean();
        const double variance = (task.y.array() - mean).square().mean();
        REQUIRE(mse <= variance + 1e-12);
    }
}

TEST_CASE("single-tree forest without bootstrap reduces to fit_tree") {
    std::mt19937_64 rng(5);
    auto task = linear_task(rng, 60, 4, 1.5, 0.3);
    forest::ForestConfig config;
    config.n_trees = 1;
    config.bootstrap = false;
    config.seed = 99;

    auto forest_fit = forest::fit_forest(task.x, task.y, config);
    std::mt19937_64 tree_rng = make_rng(config.seed, 0);
    auto tree = forest::fit_tree(task.x, task.y, config, tree_rng);

    for (int i = 0; i < 60; ++i) {
        const Eigen::RowVectorXd row = task.x.row(i);
        REQUIRE(forest_fit.predict(row) == tree.predict(row));
    }
}

TEST_CASE("forests are bit-reproducible for a fixed seed") {
    std::mt19937_64 rng(7);
    auto task = linear_task(rng, 100, 5, 2.0, 0.5);
    forest::ForestConfig config;
    config.n_trees = 30;
    config.seed = 4242;

    auto a = forest::fit_forest(task.x, task.y, config);
    auto b = forest::fit_forest(task.x, task.y, config);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
            REQUIRE(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
            REQUIRE(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
            REQUIRE(a.trees[t].nodes[n].value == b.trees[t].nodes[n].value);
        }
    }
    auto ia = forest::importances(a);
    auto ib = forest::importances(b);
    REQUIRE((ia.array() == ib.array()).all());
}

TEST_CASE("forest generalizes on a linear signal") {
    std::mt19937_64 rng(11);
    auto train = linear_task(rng, 500, 4, 3.0, 0.1);
    auto test = linear_task(rng, 200, 4, 3.0, 0.1);
    forest::ForestConfig config;
    config.n_trees = 60;
    config.seed = 17;

    auto fit = forest::fit_forest(train.x, train.y, config);
    auto pred = fit.predict_rows(test.x);
    const double mse = (pred - test.y).squaredNorm() / test.y.size();
    const double mean = test.y.mean();
    const double variance = (test.y.array() - mean).square().mean();
    CHECK(mse < 0.5 * variance);
}

TEST_CASE("forest training MSE trends down with more trees") {
    const int ladder[] = {1, 4, 16, 64};
    double means[4] = {0, 0, 0, 0};
    for (int seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(900 + seed);
        auto task = linear_task(rng, 120, 4, 2.0, 0.8);
        for (int step = 0; step < 4; ++step) {
            forest::ForestConfig config;
            config.n_trees = ladder[step];
            config.seed = seed;
            auto fit = forest::fit_forest(task.x, task.y, config);
            auto pred = fit.predict_rows(task.x);
            means[step] += (pred - task.y).squaredNorm() / task.y.size() / 20.0;
        }
    }
    // statistical trend on the seed-averaged curve
    CHECK(means[1] < means[0]);
    CHECK(means[2] < means[1]);
    CHECK(means[3] <= means[2] * 1.02);
}

TEST_CASE("importances: normalization, zero case and planted signal") {
    // constant targets: no splits anywhere -> zero vector
    Eigen::MatrixXd x(20, 3);
    x.setRandom();
    Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 1.0);
    forest::ForestConfig config;
    config.n_trees = 10;
    config.seed = 1;
    auto flat = forest::fit_forest(x, y, config);
    CHECK(forest::importances(flat).sum() == 0.0);

    int wins = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(3000 + seed);
        auto task = linear_task(rng, 100, 2, 1.0, 0.0); // y = x0 exactly, x1 noise
        forest::ForestConfig fc;
        fc.n_trees = 20;
        fc.min_samples_leaf = 2;
        fc.seed = seed;
        auto fit = forest::fit_forest(task.x, task.y, fc);
        auto imp = forest::importances(fit);
        REQUIRE(imp.minCoeff() >= 0.0);
        REQUIRE(imp.sum() == doctest::Approx(1.0).epsilon(1e-9));
        wins += imp(0) > imp(1) ? 1 : 0;
    }
    CHECK(wins >= 95);
}

TEST_CASE("permuting feature columns permutes importances (mtry = k)") {
    std::mt19937_64 rng(13);
    auto task = linear_task(rng, 90, 4, 1.0, 0.5);
    task.y += 0.5 * task.x.col(2); // two informative columns

    forest::ForestConfig config;
    config.n_trees = 1;
    config.mtry = 4;          // all features: no per-node column sampling
    config.bootstrap = false; // the single tree is then fully data-determined
    // large leaves keep node gains from tying bit-exactly across features
    config.min_samples_leaf = 8;
    config.max_depth = 4;
    config.seed = 77;

    auto base = forest::importances(forest::fit_forest(task.x, task.y, config));

    const int perm[4] = {2, 0, 3, 1};
    Eigen::MatrixXd shuffled(task.x.rows(), 4);
    for (int j = 0; j < 4; ++j) shuffled.col(perm[j]) = task.x.col(j);
    auto permuted = forest::importances(forest::fit_forest(shuffled, task.y, config));

    for (int j = 0; j < 4; ++j) REQUIRE(permuted(perm[j]) == base(j));
}

TEST_CASE("interlayer_importance recovers planted diagonal spillover") {
    const int nodes = 8, windows = 90;
    int diagonal_wins = 0;
    for (int seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(500 + seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<std::vector<double>> source(nodes, std::vector<double>(windows));
        std::vector<std::vector<double>> target(nodes, std::vector<double>(windows, 0.0));
        for (int i = 0; i < nodes; ++i)
            for (int t = 0; t < windows; ++t) source[i][t] = gauss(rng);
        for (int i = 0; i < nodes; ++i)
            for (int t = 1; t < windows; ++t)
                target[i][t] = 0.9 * source[i][t - 1] + 0.3 * gauss(rng);

        forest::ForestConfig config;
        config.n_trees = 50;
        config.min_samples_leaf = 3;
        config.seed = seed;
        auto imp = forest::interlayer_importance(source, target, 1, config);
        REQUIRE(imp.size() == nodes);
        for (int i = 0; i < nodes; ++i) {
            const double row_sum = imp.entries.row(i).sum();
            REQUIRE((std::fabs(row_sum - 1.0) < 1e-9 || row_sum == 0.0));
            Eigen::Index argmax;
            imp.entries.row(i).maxCoeff(&argmax);
            diagonal_wins += argmax == i ? 1 : 0;
        }
    }
    CHECK(diagonal_wins >= static_cast<int>(0.95 * 5 * nodes));
}

TEST_CASE("interlayer_importance degenerate inputs") {
    // all-constant sources: nothing to split on -> zero matrix
    std::vector<std::vector<double>> source(3, std::vector<double>(40, 2.0));
    std::vector<std::vector<double>> target(3, std::vector<double>(40));
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& row : target)
        for (auto& v : row) v = gauss(rng);
    forest::ForestConfig config;
    config.n_trees = 5;
    auto imp = forest::interlayer_importance(source, target, 1, config);
    CHECK(imp.entries.sum() == 0.0);

    std::vector<std::vector<double>> shorty(3, std::vector<double>(5, 0.0));
    CHECK_THROWS_AS(forest::interlayer_importance(shorty, shorty, 1, config), DataError);
    CHECK_THROWS_AS(forest::interlayer_importance(source, shorty, 1, config), DataError);
}

TEST_CASE("threshold_importance boundaries and monotonicity") {
    forest::ImportanceMatrix imp;
    imp.entries.resize(3, 3);
    imp.entries << 0.0, 0.2, 0.05, 0.3, 0.0, 0.0, 0.15, 0.45, 0.4;

    auto at_zero = forest::threshold_importance(imp, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            REQUIRE(at_zero.entries(i, j) == (imp.entries(i, j) > 0.0 ? 1 : 0));

    auto none = forest::threshold_importance(imp, 0.45);
    CHECK(none.entries.sum() == 0);

    CHECK_THROWS_AS(forest::threshold_importance(imp, -0.1), ConfigError);

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd random(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) random(i, j) = unit(rng);
    forest::ImportanceMatrix rm;
    rm.entries = random;

    auto counted = forest::threshold_importance(rm, 0.1);
    int expected = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (random(i, j) > 0.1) ++expected;
    CHECK(counted.entries.sum() == expected);

    double prev_edges = 26.0;
    for (double zeta : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        auto adj = forest::threshold_importance(rm, zeta);
        const double edges = adj.entries.sum();
        REQUIRE(edges <= prev_edges);
        prev_edges = edges;
    }
}
