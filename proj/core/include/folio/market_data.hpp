#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "folio/dates.hpp"

namespace folio {

/// Aligned close prices: dates strictly increasing, all prices positive and
/// finite, one value per asset per date.
struct PriceTable {
    std::vector<Date> dates;
    Eigen::MatrixXd closes; // rows: dates, cols: assets
    std::vector<std::string> asset_names;

    std::size_t rows() const { return dates.size(); }
    std::size_t assets() const { return asset_names.size(); }
};

/// Simple returns r[t][i] = closes[t+1][i] / closes[t][i] - 1.
/// Row j is the return realized on dates[j] (price index j+1).
struct ReturnTable {
    std::vector<Date> dates; // length T-1
    Eigen::MatrixXd returns;

    std::size_t rows() const { return dates.size(); }
    std::size_t assets() const { return static_cast<std::size_t>(returns.cols()); }
};

/// Annualized ex-ante volatility estimates, aligned with ReturnTable rows.
/// Row t depends only on returns up to and including row t. The first
/// `warmup` rows must not be traded on.
struct VolEstimateTable {
    std::vector<Date> dates;
    Eigen::MatrixXd sigma;   // fraction / sqrt(year)
    std::size_t warmup = 0;
    bool degenerate = false; // some post-warmup sigma is exactly zero

    std::size_t rows() const { return dates.size(); }
};

/// One walk-forward retraining step. All ranges are half-open intervals of
/// price-table row indices; validation is the chronological tail of training.
struct WalkForwardSplit {
    std::size_t train_begin = 0;
    std::size_t train_end = 0; // == test_begin
    std::size_t val_begin = 0;
    std::size_t val_end = 0;   // == train_end
    std::size_t test_begin = 0;
    std::size_t test_end = 0;
    int index = 0;
};

/// Parses `date,<asset1>,...,<assetN>` CSV. Rows with a missing value for
/// any selected asset are dropped (inner join); output sorted ascending by
/// date. When `expected_assets` is non-empty the columns are restricted to
/// (and ordered as) those labels.
PriceTable load_prices(std::istream& in,
                       const std::vector<std::string>& expected_assets = {});
PriceTable load_prices_file(const std::string& path,
                            const std::vector<std::string>& expected_assets = {});

ReturnTable compute_returns(const PriceTable& prices);

/// Exponentially weighted moving std with decay lambda = 1 - 2/(span+1),
/// normalized weights, annualized by sqrt(annualization_factor).
VolEstimateTable ewm_volatility(const ReturnTable& returns, int span_days = 50,
                                int annualization_factor = 252);

/// Splits the date axis into walk-forward train/validation/test ranges.
/// Test windows are `retrain_every_years` long and tile
/// [first_test_start, last date]; each split trains on everything before its
/// test window with the chronological tail reserved for validation.
std::vector<WalkForwardSplit> walk_forward_splits(const std::vector<Date>& dates,
                                                  Date first_test_start,
                                                  int retrain_every_years = 2,
                                                  double validation_fraction = 0.10);

void dump_price_csv(std::ostream& out, const PriceTable& table);
void dump_return_csv(std::ostream& out, const ReturnTable& table,
                     const std::vector<std::string>& asset_names);
void dump_vol_csv(std::ostream& out, const VolEstimateTable& table,
                  const std::vector<std::string>& asset_names);

} // namespace folio
