#pragma once

#include <Eigen/Dense>
#include <vector>

#include "folio/dates.hpp"
#include "folio/market_data.hpp"

namespace folio {

enum class PriceNormalization { WindowRelative, None };

struct FeatureConfig {
    int lookback = 50;
    PriceNormalization price_normalization = PriceNormalization::WindowRelative;
};

/// One model input: k rows (row k-1 most recent) by 2n columns ordered
/// [price_1, return_1, price_2, return_2, ...]. Price features are close
/// prices divided by the window's last close per asset (window-relative
/// mode); return features are raw simple returns.
struct FeatureWindow {
    Date timestamp;
    Eigen::MatrixXd m; // k x 2n
};

/// Window whose most recent row is price index `t`. Requires t >= lookback
/// so every row has a same-day return.
FeatureWindow build_window_at(const PriceTable& prices, const ReturnTable& returns,
                              std::size_t t, const FeatureConfig& config);

FeatureWindow build_window(const PriceTable& prices, const ReturnTable& returns, Date t,
                           const FeatureConfig& config);

/// One window per trading day in [from, to] (inclusive) with enough history,
/// strictly chronological.
std::vector<FeatureWindow> window_stream(const PriceTable& prices, const ReturnTable& returns,
                                         const FeatureConfig& config, Date from, Date to);

} // namespace folio
