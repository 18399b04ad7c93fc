#pragma once

#include <Eigen/Dense>
#include <vector>

#include "folio/features.hpp"

namespace folio {

/// A contiguous block of decision days. Window b's weights are applied to
/// next_returns.row(b), the asset returns realized the following trading day.
struct TrainingBatch {
    std::vector<FeatureWindow> windows;
    Eigen::MatrixXd next_returns;   // batch x n_assets
    std::vector<Date> return_dates; // dates of the realized returns

    std::size_t size() const { return windows.size(); }
};

inline constexpr double kVarianceEpsilon = 1e-12;

/// Batch Sharpe objective, population moments: L = E[R] / sqrt(E[R^2] - E[R]^2).
struct ObjectiveValue {
    double l = 0.0;
    double mean = 0.0;
    double second_moment = 0.0;
    Eigen::VectorXd per_sample;
    bool degenerate = false; // variance <= kVarianceEpsilon
};

/// R_b = sum_i weights(b, i) * next_returns(b, i). No cost term and no
/// volatility scaling during training.
Eigen::VectorXd portfolio_returns(const Eigen::MatrixXd& weights, const TrainingBatch& batch);

ObjectiveValue sharpe_value(const Eigen::VectorXd& returns);

/// dL/dweights for every sample: dL/dR_b = (E[R^2] - E[R] R_b) / (B s^3)
/// composed with dR_b/dw = next-day returns. Throws a Training error on
/// degenerate variance (the caller skips the batch).
Eigen::MatrixXd sharpe_gradient_wrt_weights(const TrainingBatch& batch,
                                            const Eigen::MatrixXd& weights);

} // namespace folio
