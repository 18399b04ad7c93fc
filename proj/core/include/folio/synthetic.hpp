#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "folio/market_data.hpp"

namespace folio {

/// Correlated geometric-Brownian price generator, the ground truth behind
/// the synthetic test fixtures.
struct SyntheticSpec {
    int n_assets = 4;
    int days = 1000;
    Eigen::VectorXd annual_drift; // per asset
    Eigen::VectorXd annual_vol;   // per asset
    Eigen::MatrixXd correlation;  // symmetric PSD, unit diagonal
    std::uint64_t seed = 0;
    Date start_date{2000, 1, 3};
    int annualization_factor = 252;

    static SyntheticSpec uncorrelated(int n_assets, int days, double drift, double vol,
                                      std::uint64_t seed);
};

/// Daily steps p_{t+1} = p_t * exp((mu - vol^2/2)/af + vol/sqrt(af) * z)
/// with z drawn through a symmetric square root of the correlation matrix.
/// Initial price 100 per asset; weekday calendar from start_date.
PriceTable generate(const SyntheticSpec& spec);

/// One asset with annualized Sharpe ~= sharpe_level (drift = sharpe * vol),
/// the rest driftless, all mutually uncorrelated.
SyntheticSpec planted_signal_spec(int strong_asset, double sharpe_level, int n_assets = 4,
                                  int days = 4000, double vol = 0.1, std::uint64_t seed = 0);

} // namespace folio
