#include "spillnet/feature_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "spillnet/error.hpp"

namespace spillnet::lab {

Eigen::VectorXd RidgeFit::predict(const Eigen::MatrixXd& rows) const {
    return Eigen::VectorXd::Constant(rows.rows(), coefficients(0)) +
           rows * coefficients.tail(coefficients.size() - 1);
}

RidgeFit ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   double lambda) {
    const int m = static_cast<int>(features.rows());
    const int k = static_cast<int>(features.cols());
    if (targets.size() != m) throw DataError("ridge_fit: feature/target row mismatch");
    if (m < 2) throw DataError("ridge_fit: need at least 2 observations");
    if (lambda < 0.0) throw ConfigError("ridge_fit: lambda must be >= 0");

    Eigen::MatrixXd design(m, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = features;

    Eigen::MatrixXd lhs = design.transpose() * design;
    for (int j = 1; j <= k; ++j) lhs(j, j) += lambda; // intercept unpenalized
    Eigen::VectorXd rhs = design.transpose() * targets;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
    lu.setThreshold(1e-10);
    if (lu.rank() < k + 1)
        throw NumericError("ridge_fit: singular system (rank-deficient features at this lambda)");

    RidgeFit fit;
    fit.coefficients = lu.solve(rhs);
    fit.lambda = lambda;
    return fit;
}

double ridge_cv_lambda(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       std::span<const double> ladder, int folds) {
    const int m = static_cast<int>(features.rows());
    if (ladder.empty()) throw ConfigError("ridge_cv_lambda: empty lambda ladder");
    if (folds < 2) throw ConfigError("ridge_cv_lambda: need at least 2 folds");
    if (m < 2 * folds) throw DataError("ridge_cv_lambda: too few rows for CV");

    double best_lambda = ladder[0];
    double best_mse = std::numeric_limits<double>::infinity();
    for (double lambda : ladder) {
        double mse_sum = 0.0;
        int mse_count = 0;
        for (int f = 0; f < folds; ++f) {
            const int lo = m * f / folds;
            const int hi = m * (f + 1) / folds;
            const int held = hi - lo;
            if (held == 0) continue;
            Eigen::MatrixXd train_x(m - held, features.cols());
            Eigen::VectorXd train_y(m - held);
            train_x.topRows(lo) = features.topRows(lo);
            train_y.head(lo) = targets.head(lo);
            train_x.bottomRows(m - hi) = features.bottomRows(m - hi);
            train_y.tail(m - hi) = targets.tail(m - hi);
            RidgeFit fit = ridge_fit(train_x, train_y, lambda);
            const Eigen::MatrixXd held_x = features.middleRows(lo, held);
            Eigen::VectorXd pred = fit.predict(held_x);
            mse_sum += (pred - targets.segment(lo, held)).squaredNorm();
            mse_count += held;
        }
        const double mse = mse_sum / mse_count;
        if (mse < best_mse) {
            best_mse = mse;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

double r2_score(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.size() != predictions.size() || targets.size() < 2)
        throw DataError("r2_score: need equal lengths >= 2");
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
        ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    }
    if (ss_tot == 0.0) throw NumericError("r2_score: constant targets");
    return 1.0 - ss_res / ss_tot;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DataError("pearson: need equal lengths >= 2");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) throw NumericError("pearson: constant input series");
    return cov / std::sqrt(var_a * var_b);
}

const char* return_stat_tag(ReturnStat stat) {
    switch (stat) {
        case ReturnStat::MeanReturn: return "mean_return";
        case ReturnStat::MinReturn: return "min_return";
        case ReturnStat::MaxReturn: return "max_return";
        case ReturnStat::ReturnVariance: return "return_variance";
    }
    return "?";
}

std::vector<CorrelationReport> feature_screen(const std::vector<net::DegreeSeries>& features,
                                              const ReturnWindows& returns) {
    std::map<int, int> stat_row;
    for (std::size_t i = 0; i < returns.windows.size(); ++i)
        stat_row[returns.windows[i]] = static_cast<int>(i);

    std::vector<CorrelationReport> reports;
    reports.reserve(features.size());
    for (const auto& feature : features) {
        std::vector<int> rows;
        rows.reserve(feature.windows.size());
        for (int w : feature.windows) {
            auto it = stat_row.find(w);
            if (it == stat_row.end())
                throw DataError("feature_screen: feature '" + feature.feature_name +
                                "' has window " + std::to_string(w) +
                                " with no matching return statistics");
            rows.push_back(it->second);
        }
        CorrelationReport report;
        report.feature_name = feature.feature_name;
        for (int s = 0; s < kReturnStatCount; ++s) {
            std::vector<double> target;
            target.reserve(rows.size());
            for (int r : rows) target.push_back(returns.stats[s][r]);
            try {
                report.rho[s] = pearson(feature.values, target);
            } catch (const NumericError&) {
                // constant feature or target: correlation not applicable
                report.rho[s] = std::numeric_limits<double>::quiet_NaN();
            }
        }
        reports.push_back(std::move(report));
    }
    auto min_abs = [](const CorrelationReport& r) {
        const double v = std::fabs(r.rho[static_cast<int>(ReturnStat::MinReturn)]);
        return std::isnan(v) ? -1.0 : v;
    };
    std::stable_sort(reports.begin(), reports.end(),
                     [&](const CorrelationReport& a, const CorrelationReport& b) {
                         return min_abs(a) > min_abs(b);
                     });
    return reports;
}

void write_screen_csv(const std::vector<CorrelationReport>& reports, const std::string& path,
                      const std::vector<std::string>& annotations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& note : annotations) out << "# " << note << '\n';
    out << "feature,stat,rho\n";
    char buf[32];
    for (const auto& report : reports) {
        for (int s = 0; s < kReturnStatCount; ++s) {
            out << report.feature_name << ',' << return_stat_tag(static_cast<ReturnStat>(s))
                << ',';
            if (!std::isnan(report.rho[s])) {
                std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * report.rho[s]);
                out << buf;
            }
            out << '\n';
        }
    }
}

} // namespace spillnet::lab
