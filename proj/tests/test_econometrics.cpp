#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spillnet/econometrics.hpp"
#include "spillnet/error.hpp"

using namespace spillnet;

TEST_CASE("ols_fit recovers exact and degenerate geometries") {
    // targets = 2 * column, with an intercept column present
    Eigen::MatrixXd design(6, 2);
    design.col(0).setOnes();
    design.col(1) << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd targets = 2.0 * design.col(1);
    auto fit = econ::ols_fit(design, targets);
    CHECK(fit.coefficients(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(fit.n_obs == 6);
    CHECK(fit.n_params == 2);

    // targets orthogonal to every column -> zero coefficients, rss = |y|^2
    Eigen::MatrixXd ortho(4, 2);
    ortho << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::VectorXd y(4);
    y << 1, 1, -1, -1;
    auto zero_fit = econ::ols_fit(ortho, y);
    CHECK(zero_fit.coefficients.norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(zero_fit.rss == doctest::Approx(y.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("ols_fit matches the normal-equations oracle on a random system") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd design(50, 3);
    Eigen::VectorXd targets(50);
    std::vector<std::vector<double>> raw(50, std::vector<double>(3));
    std::vector<double> raw_y(50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 3; ++j) {
            design(i, j) = gauss(rng);
            raw[i][j] = design(i, j);
        }
        targets(i) = gauss(rng);
        raw_y[i] = targets(i);
    }
    auto fit = econ::ols_fit(design, targets);
    auto expected = oracle::normal_equations_ols(raw, raw_y);
    for (int j = 0; j < 3; ++j)
        CHECK(fit.coefficients(j) == doctest::Approx(expected.coefficients[j]).epsilon(1e-8));
    CHECK(fit.rss == doctest::Approx(expected.rss).epsilon(1e-10));
}

TEST_CASE("ols_fit error paths") {
    Eigen::MatrixXd dup(5, 2);
    dup.col(0).setOnes();
    dup.col(1).setOnes(); // collinear with intercept
    Eigen::VectorXd y = Eigen::VectorXd::Random(5);
    CHECK_THROWS_AS(econ::ols_fit(dup, y), NumericError);

    Eigen::MatrixXd wide(2, 3);
    wide.setZero();
    CHECK_THROWS_AS(econ::ols_fit(wide, Eigen::VectorXd::Zero(2)), DataError);
}

TEST_CASE("ols_fit is scale-robust") {
    // regressors at dollar-volume magnitudes must not trip the rank test
    std::mt19937_64 rng(311);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd design(40, 3);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = 1e8 + 1e6 * gauss(rng);
        design(i, 2) = 1e8 + 1e6 * gauss(rng);
        y(i) = 1e8 + 1e6 * gauss(rng);
    }
    auto fit = econ::ols_fit(design, y);
    CHECK(std::isfinite(fit.rss));
    CHECK(fit.rss >= 0.0);
}

TEST_CASE("f_statistic formula, cap and error paths") {
    CHECK(econ::f_statistic(1.0, 1.0, 1, 10) == 0.0);
    CHECK(econ::f_statistic(2.0, 1.0, 1, 10) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(econ::f_statistic(5.0, 0.0, 2, 7) == econ::kFStatCap);
    CHECK_THROWS_AS(econ::f_statistic(-1.0, 0.5, 1, 10), NumericError);
    CHECK_THROWS_AS(econ::f_statistic(1.0, 2.0, 1, 10), NumericError);
    CHECK_THROWS_AS(econ::f_statistic(2.0, 1.0, 0, 10), ConfigError);
    CHECK_THROWS_AS(econ::f_statistic(2.0, 1.0, 1, 0), ConfigError);
    // tiny inversion inside the tolerance clamps to zero
    CHECK(econ::f_statistic(1.0 - 1e-10, 1.0, 1, 10) == 0.0);
}

TEST_CASE("f_cdf boundary, symmetry and quadrature agreement") {
    CHECK(econ::f_cdf(0.0, 3, 7) == 0.0);
    for (int d = 1; d <= 10; ++d)
        CHECK(std::fabs(econ::f_cdf(1.0, d, d) - 0.5) < 1e-10);

    CHECK(std::fabs(econ::f_cdf(3.0, 2, 10) - oracle::f_cdf_quadrature(3.0, 2, 10)) < 1e-8);

    CHECK_THROWS_AS(econ::f_cdf(1.0, 0, 5), ConfigError);
    CHECK_THROWS_AS(econ::f_cdf(1.0, 5, 0), ConfigError);
}

TEST_CASE("f_cdf is monotone nondecreasing in x") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int d1 = 1 + static_cast<int>(rng() % 12);
        const int d2 = 1 + static_cast<int>(rng() % 12);
        double prev = 0.0;
        for (double x = 0.0; x <= 25.0; x += 0.25) {
            const double cur = econ::f_cdf(x, d1, d2);
            REQUIRE(cur >= prev);
            REQUIRE(cur <= 1.0);
            prev = cur;
        }
    }
}

namespace {

std::vector<double> white_noise(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) v = gauss(rng);
    return out;
}

} // namespace

TEST_CASE("granger_test perfect causality hits the cap") {
    std::mt19937_64 rng(29);
    auto x = white_noise(rng, 80);
    std::vector<double> y(80, 0.0);
    for (int t = 1; t < 80; ++t) y[t] = x[t - 1];
    auto result = econ::granger_test(x, y, 1);
    CHECK(result.f_stat == econ::kFStatCap);
    CHECK(result.p_value < 1e-12);
}

TEST_CASE("granger_test matches the independent two-regression oracle") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // fixed 120-point pair with planted coefficient 0.8
    std::vector<double> x = white_noise(rng, 120), y(120, 0.0);
    for (int t = 1; t < 120; ++t) y[t] = 0.8 * x[t - 1] + 0.4 * y[t - 1] + gauss(rng);

    auto lib = econ::granger_test(x, y, 1);
    auto ref = oracle::granger_two_regressions(x, y, 1);
    CHECK(lib.f_stat == doctest::Approx(ref.f_stat).epsilon(1e-9));
    CHECK(std::fabs(lib.p_value - ref.p_value) < 1e-8);
    // the advertised identity: p = 1 - F_cdf(f, q, dof)
    CHECK(lib.p_value ==
          doctest::Approx(1.0 - econ::f_cdf(lib.f_stat, 1, (120 - 1) - 3)).epsilon(1e-15));
}

TEST_CASE("granger_test lag-2 agreement with the oracle") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto x = white_noise(rng, 150);
    std::vector<double> y(150, 0.0);
    for (int t = 2; t < 150; ++t)
        y[t] = 0.3 * x[t - 2] + 0.2 * y[t - 1] + gauss(rng);
    auto lib = econ::granger_test(x, y, 2);
    auto ref = oracle::granger_two_regressions(x, y, 2);
    CHECK(lib.f_stat == doctest::Approx(ref.f_stat).epsilon(1e-9));
    CHECK(std::fabs(lib.p_value - ref.p_value) < 1e-8);
}

TEST_CASE("granger_test null calibration at theta = 0.05") {
    std::mt19937_64 rng(41);
    int rejections = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        auto x = white_noise(rng, 120);
        auto y = white_noise(rng, 120);
        if (econ::granger_test(x, y, 1).p_value <= 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("granger_test is invariant to affine rescaling") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = white_noise(rng, 90);
        std::vector<double> y(90, 0.0);
        for (int t = 1; t < 90; ++t) y[t] = 0.5 * x[t - 1] + gauss(rng);
        const double f0 = econ::granger_test(x, y, 1).f_stat;

        const double a = trial % 2 ? 3.5 : -3.5, b = -2.0, c = 0.04, d = 11.0;
        std::vector<double> xs(90), ys(90);
        for (int t = 0; t < 90; ++t) {
            xs[t] = a * x[t] + b;
            ys[t] = c * y[t] + d;
        }
        const double f1 = econ::granger_test(xs, ys, 1).f_stat;
        CHECK(f1 == doctest::Approx(f0).epsilon(1e-8));
    }
}

TEST_CASE("granger_test rejects degenerate input") {
    std::mt19937_64 rng(47);
    auto x = white_noise(rng, 50);
    std::vector<double> constant(50, 2.0);
    CHECK_THROWS_AS(econ::granger_test(x, constant, 1), NumericError);

    std::vector<double> tiny(4, 0.0);
    CHECK_THROWS_AS(econ::granger_test(tiny, tiny, 1), DataError);

    auto y = white_noise(rng, 49);
    CHECK_THROWS_AS(econ::granger_test(x, y, 1), DataError);
    CHECK_THROWS_AS(econ::granger_test(x, x, 0), ConfigError);
}

TEST_CASE("adding a noise regressor never increases rss") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 30 + static_cast<int>(rng() % 40);
        Eigen::MatrixXd base(n, 3);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            base(i, 0) = 1.0;
            base(i, 1) = gauss(rng);
            base(i, 2) = gauss(rng);
            y(i) = gauss(rng);
        }
        Eigen::MatrixXd extended(n, 4);
        extended.leftCols(3) = base;
        for (int i = 0; i < n; ++i) extended(i, 3) = gauss(rng);
        const double rss_base = econ::ols_fit(base, y).rss;
        const double rss_ext = econ::ols_fit(extended, y).rss;
        CHECK(rss_ext <= rss_base + 1e-9 * std::max(1.0, rss_base));
    }
}

TEST_CASE("pvalue_matrix shape and per-cell isolation") {
    // n = 1: no off-diagonal cells
    econ::PValueMatrix one = econ::pvalue_matrix({{1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0}}, 1);
    CHECK(one.size() == 1);
    CHECK(std::isnan(one.entries(0, 0)));

    std::mt19937_64 rng(59);
    std::vector<std::vector<double>> noise;
    for (int i = 0; i < 3; ++i) noise.push_back(white_noise(rng, 100));
    auto matrix = econ::pvalue_matrix(noise, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) {
                CHECK(std::isnan(matrix.entries(i, j)));
            } else {
                REQUIRE_FALSE(std::isnan(matrix.entries(i, j)));
                REQUIRE(matrix.entries(i, j) >= 0.0);
                REQUIRE(matrix.entries(i, j) <= 1.0);
            }
        }

    // a constant series degrades its own cells, not the whole matrix
    std::vector<std::vector<double>> with_constant = noise;
    with_constant.push_back(std::vector<double>(100, 5.0));
    auto isolated = econ::pvalue_matrix(with_constant, 1);
    CHECK(std::isnan(isolated.entries(3, 0))); // constant target
    REQUIRE_FALSE(std::isnan(isolated.entries(1, 0)));
}

TEST_CASE("pvalue_matrix ranks planted chain edges first") {
    std::normal_distribution<double> gauss(0.0, 1.0);
    int hits = 0;
    for (int run = 0; run < 100; ++run) {
        std::mt19937_64 seed_rng(1000 + run);
        std::vector<std::vector<double>> chain(5, std::vector<double>(120, 0.0));
        for (int t = 0; t < 120; ++t) chain[0][t] = gauss(seed_rng);
        for (int node = 1; node < 5; ++node)
            for (int t = 1; t < 120; ++t)
                chain[node][t] = 0.8 * chain[node - 1][t - 1] + gauss(seed_rng);
        auto pm = econ::pvalue_matrix(chain, 1);

        std::vector<std::pair<double, std::pair<int, int>>> cells;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                if (i != j) cells.push_back({pm.entries(i, j), {i, j}});
        std::sort(cells.begin(), cells.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        bool planted_first = true;
        for (int k = 0; k < 4; ++k) {
            const auto [i, j] = cells[k].second;
            planted_first = planted_first && (i == j + 1); // edge j -> j+1
        }
        hits += planted_first ? 1 : 0;
    }
    CHECK(hits >= 95);
}
