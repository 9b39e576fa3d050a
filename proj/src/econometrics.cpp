#include "spillnet/econometrics.hpp"

#include <cmath>
#include <limits>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"

namespace spillnet::econ {

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) {
    const int n_obs = static_cast<int>(design.rows());
    const int n_params = static_cast<int>(design.cols());
    if (targets.size() != n_obs) throw DataError("ols_fit: design/target row mismatch");
    if (n_obs <= n_params)
        throw DataError("ols_fit: need more observations than parameters (" +
                        std::to_string(n_obs) + " <= " + std::to_string(n_params) + ")");

    // Column equilibration keeps the pivot-based rank test scale-invariant;
    // regressor magnitudes can span many orders (e.g. dollar volume).
    Eigen::VectorXd scale(n_params);
    for (int j = 0; j < n_params; ++j) {
        const double norm = design.col(j).norm();
        if (norm == 0.0) throw NumericError("ols_fit: rank-deficient design matrix");
        scale(j) = 1.0 / norm;
    }
    Eigen::MatrixXd scaled = design * scale.asDiagonal();

    Eigen::MatrixXd xtx = scaled.transpose() * scaled;
    Eigen::VectorXd xty = scaled.transpose() * targets;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    lu.setThreshold(kPivotTolerance);
    if (lu.rank() < n_params) throw NumericError("ols_fit: rank-deficient design matrix");

    OlsFit fit;
    fit.coefficients = scale.asDiagonal() * lu.solve(xty);
    fit.rss = (targets - design * fit.coefficients).squaredNorm();
    fit.n_obs = n_obs;
    fit.n_params = n_params;
    return fit;
}

double f_statistic(double rss_restricted, double rss_unrestricted, int q, int dof) {
    if (q < 1) throw ConfigError("f_statistic: q must be >= 1");
    if (dof < 1) throw ConfigError("f_statistic: dof must be >= 1");
    if (rss_restricted < 0 || rss_unrestricted < 0)
        throw NumericError("f_statistic: negative residual sum of squares");
    if (rss_restricted < rss_unrestricted - 1e-9)
        throw NumericError("f_statistic: restricted rss below unrestricted rss (fitting bug)");
    if (rss_unrestricted < 1e-12) return kFStatCap;
    double num = std::max(0.0, rss_restricted - rss_unrestricted) / q;
    return num / (rss_unrestricted / dof);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw NumericError("reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_frac(a, b, x) / a;
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double f_cdf(double x, int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw ConfigError("f_cdf: degrees of freedom must be >= 1");
    if (x <= 0.0) return 0.0;
    double z = d1 * x / (d1 * x + d2);
    return reg_inc_beta(0.5 * d1, 0.5 * d2, z);
}

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag) {
    if (lag < 1) throw ConfigError("granger_test: lag must be >= 1");
    const int t_len = static_cast<int>(y.size());
    if (static_cast<int>(x.size()) != t_len)
        throw DataError("granger_test: series lengths differ");
    const int n = t_len - lag;                 // usable observations
    const int k_unrestricted = 2 * lag + 1;    // intercept + y lags + x lags
    if (n <= k_unrestricted)
        throw DataError("granger_test: series too short for lag " + std::to_string(lag));

    Eigen::VectorXd targets(n);
    Eigen::MatrixXd unrestricted(n, k_unrestricted);
    for (int row = 0; row < n; ++row) {
        const int t = row + lag;
        targets(row) = y[t];
        unrestricted(row, 0) = 1.0;
        for (int i = 1; i <= lag; ++i) {
            unrestricted(row, i) = y[t - i];
            unrestricted(row, lag + i) = x[t - i];
        }
    }
    const double mean = targets.mean();
    if ((targets.array() - mean).abs().maxCoeff() == 0.0)
        throw NumericError("granger_test: y is constant over the usable range");

    OlsFit full = ols_fit(unrestricted, targets);
    OlsFit restricted = ols_fit(unrestricted.leftCols(lag + 1), targets);

    GrangerResult result;
    result.lag = lag;
    const int dof = n - k_unrestricted;
    result.f_stat = f_statistic(restricted.rss, full.rss, lag, dof);
    result.p_value = 1.0 - f_cdf(result.f_stat, lag, dof);
    return result;
}

PValueMatrix pvalue_matrix(const std::vector<std::vector<double>>& layer_series, int lag) {
    const int n = static_cast<int>(layer_series.size());
    if (n == 0) throw DataError("pvalue_matrix: no series");
    const std::size_t len = layer_series.front().size();
    for (const auto& s : layer_series)
        if (s.size() != len) throw DataError("pvalue_matrix: series not aligned");

    PValueMatrix matrix;
    matrix.entries =
        Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            try {
                matrix.entries(i, j) = granger_test(layer_series[j], layer_series[i], lag).p_value;
            } catch (const NumericError&) {
                // degenerate pair stays not-applicable
            }
        }
    }
    return matrix;
}

void write_pvalue_csv(const PValueMatrix& matrix, const std::string& path) {
    csv::write_matrix(matrix.entries, path);
}

} // namespace spillnet::econ
