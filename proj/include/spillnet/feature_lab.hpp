#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "spillnet/layer_network.hpp"

namespace spillnet::lab {

struct RidgeFit {
    // [intercept, slope_1 ... slope_k]
    Eigen::VectorXd coefficients;
    double lambda = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const;
};

// argmin ||y - b0 - X b||^2 + lambda ||b||^2, intercept unpenalized, solved
// by the regularized normal equations. X carries no intercept column.
RidgeFit ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   double lambda);

// Chronologically contiguous k-fold CV over a lambda ladder; returns the
// lambda with the lowest mean validation MSE.
double ridge_cv_lambda(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       std::span<const double> ladder, int folds = 5);

double r2_score(std::span<const double> targets, std::span<const double> predictions);

double pearson(std::span<const double> a, std::span<const double> b);

// Windowed return statistics, the screening targets. Order is fixed:
// mean, min, max, variance.
enum class ReturnStat { MeanReturn = 0, MinReturn = 1, MaxReturn = 2, ReturnVariance = 3 };
inline constexpr int kReturnStatCount = 4;
const char* return_stat_tag(ReturnStat stat);

struct ReturnWindows {
    std::vector<int> windows; // window start indices
    std::array<std::vector<double>, kReturnStatCount> stats;
};

struct CorrelationReport {
    std::string feature_name;
    std::array<double, kReturnStatCount> rho{};
};

// One report per degree feature, each correlated against the four return
// statistics over the feature's own windows; sorted by |rho with min return|
// descending.
std::vector<CorrelationReport> feature_screen(const std::vector<net::DegreeSeries>& features,
                                              const ReturnWindows& returns);

// feature,stat,rho rows; rho rendered as a percentage with 2 decimals.
void write_screen_csv(const std::vector<CorrelationReport>& reports, const std::string& path,
                      const std::vector<std::string>& annotations = {});

} // namespace spillnet::lab
