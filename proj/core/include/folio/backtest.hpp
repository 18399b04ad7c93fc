#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/metrics.hpp"
#include "folio/network.hpp"
#include "folio/strategies.hpp"
#include "folio/training.hpp"

namespace folio {

struct BacktestConfig {
    double sigma_target = 0.10; // annualized, fraction / sqrt(year)
    double cost_rate = 1e-4;    // fraction of traded value
    bool scaling_enabled = true;
    int annualization_factor = 252;
    int vol_span_days = 50;
    double vol_floor = 0.0; // <= 0 disables; otherwise sigma is floored
};

/// Per-date leverage-scaled exposures (sigma_tgt / sigma_i) * w_i, decided at
/// the same dates as the underlying WeightPath.
struct ScaledPositionPath {
    std::vector<Date> dates;
    Eigen::MatrixXd positions;
};

/// Daily net/gross returns under volatility scaling and linear costs.
/// net = gross - cost each day; cum_log_equity = running sum of log(1+net).
struct EquityCurve {
    std::vector<Date> dates;
    Eigen::VectorXd gross;
    Eigen::VectorXd cost;
    Eigen::VectorXd net;
    Eigen::VectorXd cum_log_equity;

    std::size_t days() const { return dates.size(); }
};

/// Scaled positions for every weight date. With scaling on, each date's
/// volatility estimate must be out of warmup.
ScaledPositionPath scale_positions(const WeightPath& weights, const VolEstimateTable& vols,
                                   const BacktestConfig& config);

/// Applies the volatility-scaled, cost-adjusted return recursion to a path
/// of decisions on consecutive trading days:
///   gross_t = sum_i scale_{i,t-1} w_{i,t-1} r_{i,t}
///   cost_t  = C * sum_i |scale_{i,t-1} w_{i,t-1} - scale_{i,t-2} w_{i,t-2}|
/// The first tradable day pays cost on the full initial position.
EquityCurve simulate_equity(const WeightPath& weights, const ReturnTable& returns,
                      const VolEstimateTable& vols, const BacktestConfig& config);

/// Everything a dataset-wide run needs, built once from a price table.
struct MarketDataset {
    PriceTable prices;
    ReturnTable returns;
    VolEstimateTable vols;

    static MarketDataset build(PriceTable prices, int vol_span_days = 50,
                               int annualization_factor = 252);
};

struct StrategyConfig {
    double dwp_exponent = 0.5;
    int estimate_window = 50; // rolling window for mv / md
    SimplexSolverConfig solver{};
    std::uint64_t seed = 0;
};

/// Registered strategy names: alloc1..alloc4, mv, md, dwp, dls.
const std::vector<std::string>& standard_strategies();
bool is_known_strategy(const std::string& name);

/// Weights for decision days [from, to] (inclusive price-row indices) for
/// any baseline strategy (everything except dls). `minvar_fallback_days`
/// counts the days mv fell back to minimum variance.
WeightPath baseline_weights(const std::string& name, const MarketDataset& data,
                            std::size_t from, std::size_t to, const StrategyConfig& config,
                            std::size_t* minvar_fallback_days = nullptr);

struct TrainedSplitModel {
    WalkForwardSplit split;
    ModelParams params;
    AdamState adam; // optimizer state at the selected epoch
    std::vector<EpochSummary> log;
    int best_epoch = -1;
};

/// Retrains the network once per walk-forward split (on all data before the
/// split's test window, validation tail held out).
std::vector<TrainedSplitModel> train_walk_forward(const MarketDataset& data,
                                                  const std::vector<WalkForwardSplit>& splits,
                                                  const TrainConfig& config);

struct RunResult {
    std::string strategy;
    WeightPath weights;            // decisions over the whole test period
    ScaledPositionPath positions;
    EquityCurve equity;
    MetricBundle metrics;
    std::size_t minvar_fallback_days = 0; // mv only
};

/// Emits per-split test weights, concatenates them, and applies the scaled
/// cost recursion once over the concatenated path (so turnover at split
/// boundaries is paid). For `dls` pass the per-split models.
RunResult run_walk_forward(const std::string& strategy, const MarketDataset& data,
                           const std::vector<WalkForwardSplit>& splits,
                           const BacktestConfig& bt_config, const StrategyConfig& strat_config,
                           const TrainConfig& train_config,
                           const std::vector<TrainedSplitModel>* dls_models = nullptr);

/// Raw weights and scaled positions side by side for plotting, restricted to
/// [from, to] (inclusive).
struct WeightShiftTable {
    std::vector<Date> dates;
    Eigen::MatrixXd weights;
    Eigen::MatrixXd positions;
};
WeightShiftTable weight_shift_series(const WeightPath& weights, const ScaledPositionPath& scaled,
                                     Date from, Date to);

} // namespace folio
