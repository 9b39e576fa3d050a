#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "spillnet/error.hpp"
#include "spillnet/layer_network.hpp"

using namespace spillnet;

namespace {

econ::PValueMatrix make_pvals(const Eigen::MatrixXd& entries) {
    econ::PValueMatrix m;
    m.entries = entries;
    for (Eigen::Index i = 0; i < entries.rows(); ++i)
        m.entries(i, i) = std::numeric_limits<double>::quiet_NaN();
    return m;
}

Eigen::MatrixXd random_pvals(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
    return m;
}

} // namespace

TEST_CASE("threshold_pvalues applies the rule entrywise") {
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.01, 0.2, 0.5;
    auto adj = net::threshold_pvalues(make_pvals(p), 0.05);
    CHECK(adj.entries(0, 0) == 0);
    CHECK(adj.entries(0, 1) == 1);
    CHECK(adj.entries(1, 0) == 0);
    CHECK(adj.entries(1, 1) == 0);
    CHECK(adj.theta == doctest::Approx(0.05));

    // all p = 1 -> empty graph
    auto empty = net::threshold_pvalues(make_pvals(Eigen::MatrixXd::Ones(4, 4)), 0.05);
    CHECK(empty.entries.sum() == 0);

    CHECK_THROWS_AS(net::threshold_pvalues(make_pvals(p), 0.0), ConfigError);
    CHECK_THROWS_AS(net::threshold_pvalues(make_pvals(p), 1.0), ConfigError);
    CHECK_THROWS_AS(net::threshold_pvalues(make_pvals(p), 1.5), ConfigError);
}

TEST_CASE("threshold_pvalues edge count matches a counting oracle") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        auto p = random_pvals(rng, n);
        const double theta = 0.05 + 0.9 * (trial / 30.0);
        auto adj = net::threshold_pvalues(make_pvals(p), theta);
        int expected = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && p(i, j) <= theta) ++expected;
        REQUIRE(adj.entries.sum() == expected);
        for (int i = 0; i < n; ++i) REQUIRE(adj.entries(i, i) == 0);
    }
}

TEST_CASE("threshold monotonicity in theta") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        auto p = make_pvals(random_pvals(rng, n));
        std::uniform_real_distribution<double> unit(0.01, 0.99);
        double t1 = unit(rng), t2 = unit(rng);
        if (t1 > t2) std::swap(t1, t2);
        auto a1 = net::threshold_pvalues(p, t1);
        auto a2 = net::threshold_pvalues(p, t2);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                REQUIRE(a1.entries(i, j) <= a2.entries(i, j)); // subset of edges
    }
}

TEST_CASE("re-thresholding the complemented adjacency is idempotent") {
    std::mt19937_64 rng(71);
    auto p = make_pvals(random_pvals(rng, 6));
    auto adj = net::threshold_pvalues(p, 0.3);
    // 1 - R as pseudo p-values: edges map to 0 (kept), non-edges to 1 (cut)
    Eigen::MatrixXd pseudo = (1 - adj.entries.array()).cast<double>();
    for (double theta : {0.1, 0.5, 0.9}) {
        auto again = net::threshold_pvalues(make_pvals(pseudo), theta);
        REQUIRE((again.entries.array() == adj.entries.array()).all());
    }
}

TEST_CASE("node_degree conventions") {
    // complete digraph on 3 nodes: every node has in 2 + out 2
    Eigen::MatrixXi complete = Eigen::MatrixXi::Ones(3, 3);
    complete.diagonal().setZero();
    auto total = net::node_degree(complete, net::DegreeMode::Total);
    for (int i = 0; i < 3; ++i) CHECK(total(i) == doctest::Approx(4.0));

    auto zero = net::node_degree(Eigen::MatrixXi::Zero(5, 5));
    CHECK(zero.sum() == 0.0);

    Eigen::MatrixXi m(3, 3);
    m << 0, 1, 0, 0, 0, 0, 1, 1, 0;
    auto in = net::node_degree(m, net::DegreeMode::In);
    auto out = net::node_degree(m, net::DegreeMode::Out);
    CHECK(in(0) == 1.0);  // row sums: securities that cause node 0
    CHECK(in(2) == 2.0);
    CHECK(out(1) == 2.0); // column sums: nodes that node 1 causes
    CHECK(out(2) == 0.0);
}

TEST_CASE("node_degree matches the row+column oracle on random matrices") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 12);
        Eigen::MatrixXi m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = (i != j && rng() % 3 == 0) ? 1 : 0;
        auto deg = net::node_degree(m, net::DegreeMode::Total);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double expected = 0.0;
            for (int j = 0; j < n; ++j) expected += m(i, j) + m(j, i);
            REQUIRE(deg(i) == doctest::Approx(expected));
            total += deg(i);
        }
        // sum of total degrees double-counts each directed edge
        REQUIRE(total == doctest::Approx(2.0 * m.sum()));
    }
}

TEST_CASE("degree_feature_series aggregates per window") {
    Eigen::MatrixXi complete = Eigen::MatrixXi::Ones(3, 3);
    complete.diagonal().setZero();

    auto single = net::degree_feature_series({complete}, {0}, "degree price");
    REQUIRE(single.values.size() == 1);
    CHECK(single.values[0] == doctest::Approx(4.0));
    CHECK(single.feature_name == "degree price");

    std::vector<Eigen::MatrixXi> zeros(4, Eigen::MatrixXi::Zero(3, 3));
    auto flat = net::degree_feature_series(zeros, {0, 30, 60, 90}, "degree return");
    for (double v : flat.values) CHECK(v == 0.0);

    // random stack against a direct recomputation
    std::mt19937_64 rng(79);
    std::vector<Eigen::MatrixXi> stack;
    std::vector<int> starts;
    for (int k = 0; k < 6; ++k) {
        Eigen::MatrixXi m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = (i != j && rng() % 2 == 0) ? 1 : 0;
        stack.push_back(m);
        starts.push_back(30 * k);
    }
    auto series = net::degree_feature_series(stack, starts, "degree trading value");
    for (int k = 0; k < 6; ++k) {
        double mean = net::node_degree(stack[k]).mean();
        REQUIRE(series.values[k] == doctest::Approx(mean));
    }
    auto sums = net::degree_feature_series(stack, starts, "sum", net::DegreeMode::Total,
                                           net::DegreeAggregation::Sum);
    for (int k = 0; k < 6; ++k)
        REQUIRE(sums.values[k] == doctest::Approx(4.0 * series.values[k]));

    CHECK_THROWS_AS(net::degree_feature_series({}, {}, "x"), DataError);
    CHECK_THROWS_AS(net::degree_feature_series(stack, {0, 30, 60, 90, 120, 160}, "x"), DataError);
    CHECK_THROWS_AS(net::degree_feature_series(stack, {0, 30, 60, 90, 120}, "x"), DataError);
}
