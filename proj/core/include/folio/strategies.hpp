#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "folio/market_data.hpp"

namespace folio {

/// Per-day portfolio weight vectors on the simplex; row t is decided at
/// dates[t] using only information up to that date.
struct WeightPath {
    std::vector<Date> dates;
    Eigen::MatrixXd weights;

    std::size_t rows() const { return dates.size(); }
};

/// Rolling expected-return and covariance estimates aligned with ReturnTable
/// rows; rows before valid_from lack a full window.
struct RollingEstimates {
    Eigen::MatrixXd mu;               // rows x n, simple moving average
    std::vector<Eigen::MatrixXd> cov; // sample covariance, divisor window-1
    std::size_t valid_from = 0;
};

struct SimplexSolverConfig {
    int iterations = 500;
    int restarts = 10;
    std::uint64_t seed = 0;
    double ridge_scale = 1e-8; // ridge = ridge_scale * trace(sigma) / n
};

struct SolverResult {
    Eigen::VectorXd weights;
    double value = 0.0;
    bool minvar_fallback = false; // all mu <= 0: minimum variance instead
};

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(Eigen::VectorXd v);

/// Annual fixed-ratio reallocation: weights reset to `targets` on the first
/// trading day of each calendar year and drift with returns in between.
/// The path covers every return date, starting at the targets.
WeightPath fixed_allocation_path(const ReturnTable& returns, const Eigen::VectorXd& targets);

RollingEstimates rolling_estimates(const ReturnTable& returns, int window = 50);

/// Long-only max-Sharpe weights: maximizes mu'w / sqrt(w'Sigma w) over the
/// simplex by projected gradient ascent with seeded restarts.
SolverResult max_sharpe_weights(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                const SimplexSolverConfig& config);

/// Maximum diversification: maximizes (sum_i w_i sigma_i) / sqrt(w'Sigma w).
SolverResult max_diversification_weights(const Eigen::MatrixXd& sigma,
                                         const SimplexSolverConfig& config);

/// Diversity-weighted portfolio over price-proportional pseudo market
/// weights: w_i = pi_i^p / sum_j pi_j^p, updated daily over return dates.
WeightPath diversity_weighted_path(const PriceTable& prices, double exponent = 0.5);

/// Target ratios for the four fixed reallocation strategies, asset order
/// [shares, bonds, commodities, volatility]. `which` is 1..4.
Eigen::VectorXd allocation_targets(int which);

} // namespace folio
