#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "spillnet/market_data.hpp"

namespace spillnet::econ {

struct OlsFit {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    int n_obs = 0;
    int n_params = 0;
};

struct GrangerResult {
    double f_stat = 0.0;
    double p_value = 1.0;
    int lag = 1;
};

// Pairwise Granger p-values for one layer and window. entry(i, j) is the
// p-value of "series j Granger-causes series i"; NaN marks not-applicable
// cells (the diagonal, and pairs whose test degenerated).
struct PValueMatrix {
    market::Layer layer = market::Layer::Price;
    int window = 0;
    Eigen::MatrixXd entries;

    int size() const { return static_cast<int>(entries.rows()); }
};

// Perfect-fit cap applied when the unrestricted residual vanishes.
inline constexpr double kFStatCap = 1e12;
// Relative pivot tolerance for rank detection on the normal equations.
inline constexpr double kPivotTolerance = 1e-10;

// Least squares via the normal equations with full-pivot rank detection.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets);

// F = ((rss_r - rss_u) / q) / (rss_u / dof); capped at kFStatCap when
// rss_u < 1e-12. rss_r below rss_u by more than 1e-9 signals a fitting bug.
double f_statistic(double rss_restricted, double rss_unrestricted, int q, int dof);

// P(F <= x) for the F(d1, d2) distribution via the regularized incomplete
// beta function I_{d1 x / (d1 x + d2)}(d1/2, d2/2).
double f_cdf(double x, int d1, int d2);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);

// Tests "x Granger-causes y" with the given lag. Restricted model uses only
// y's own lags; q = lag restrictions; residual dof = (T - lag) - (2*lag + 1).
GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag);

// n*(n-1) pairwise tests; a degenerate pair becomes a NaN cell instead of
// aborting the matrix.
PValueMatrix pvalue_matrix(const std::vector<std::vector<double>>& layer_series, int lag);

// n x n CSV, 12 significant digits, NaN cells (incl. diagonal) written empty.
void write_pvalue_csv(const PValueMatrix& matrix, const std::string& path);

} // namespace spillnet::econ
