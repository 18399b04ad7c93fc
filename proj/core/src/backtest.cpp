#include "folio/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

namespace {

// Price-row index of the first weight date; verifies the path sits on
// consecutive trading days of the price calendar.
std::size_t align_path(const WeightPath& weights, const std::vector<Date>& dates) {
    if (weights.rows() == 0) throw_error(ErrorKind::Contract, "empty weight path");
    const std::size_t start = index_of(dates, weights.dates.front());
    for (std::size_t j = 0; j < weights.rows(); ++j) {
        const std::size_t idx = start + j;
        if (idx >= dates.size() || dates[idx] != weights.dates[j])
            throw_error(ErrorKind::Contract,
                        "weight path dates are not consecutive trading days at " +
                            weights.dates[j].to_string());
    }
    return start;
}

} // namespace

ScaledPositionPath scale_positions(const WeightPath& weights, const VolEstimateTable& vols,
                                   const BacktestConfig& config) {
    ScaledPositionPath out;
    out.dates = weights.dates;
    out.positions.resize(weights.weights.rows(), weights.weights.cols());
    for (std::size_t j = 0; j < weights.rows(); ++j) {
        if (!config.scaling_enabled) {
            out.positions.row(static_cast<Eigen::Index>(j)) =
                weights.weights.row(static_cast<Eigen::Index>(j));
            continue;
        }
        // The ex-ante estimate for a decision at price row t uses returns up
        // to and including day t; that is vol row t-1, which carries the
        // decision date itself.
        const std::size_t vol_row = lower_bound_index(vols.dates, weights.dates[j]);
        if (vol_row >= vols.rows() || vols.dates[vol_row] != weights.dates[j])
            throw_error(ErrorKind::InsufficientData,
                        "no volatility estimate for decision date " +
                            weights.dates[j].to_string());
        if (vol_row < vols.warmup)
            throw_error(ErrorKind::InsufficientData,
                        "volatility estimate still in warmup at " + weights.dates[j].to_string());
        Eigen::ArrayXd sigma = vols.sigma.row(static_cast<Eigen::Index>(vol_row)).transpose().array();
        if (config.vol_floor > 0.0) sigma = sigma.max(config.vol_floor);
        for (Eigen::Index i = 0; i < sigma.size(); ++i)
            if (sigma(i) <= 0.0)
                throw_error(ErrorKind::Numeric,
                            "degenerate (zero) volatility for asset " + std::to_string(i) +
                                " (" + weights.dates[j].to_string() + ")");
        out.positions.row(static_cast<Eigen::Index>(j)) =
            (weights.weights.row(static_cast<Eigen::Index>(j)).transpose().array() *
             (config.sigma_target / sigma))
                .transpose();
    }
    return out;
}

EquityCurve simulate_equity(const WeightPath& weights, const ReturnTable& returns,
                      const VolEstimateTable& vols, const BacktestConfig& config) {
    if (weights.rows() < 2)
        throw_error(ErrorKind::Contract, "weight path needs at least 2 decision days");
    if (config.sigma_target <= 0.0)
        throw_error(ErrorKind::Config, "sigma_target must be positive");
    if (config.cost_rate < 0.0)
        throw_error(ErrorKind::Config, "cost_rate must be non-negative");

    const ScaledPositionPath scaled = scale_positions(weights, vols, config);
    const std::size_t m = weights.rows();

    EquityCurve curve;
    curve.dates.assign(weights.dates.begin() + 1, weights.dates.end());
    const Eigen::Index days = static_cast<Eigen::Index>(m - 1);
    curve.gross.resize(days);
    curve.cost.resize(days);
    curve.net.resize(days);
    curve.cum_log_equity.resize(days);

    double cum_log = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
        // Return realized on weights.dates[j]; return rows are dated by their
        // realization day.
        const std::size_t ret_row = index_of(returns.dates, weights.dates[j]);
        const Eigen::RowVectorXd pos_prev = scaled.positions.row(static_cast<Eigen::Index>(j - 1));
        const double gross = pos_prev.cwiseProduct(
                                        returns.returns.row(static_cast<Eigen::Index>(ret_row)))
                                 .sum();
        double traded;
        if (j == 1) {
            traded = pos_prev.cwiseAbs().sum(); // previous position is zero
        } else {
            traded = (pos_prev - scaled.positions.row(static_cast<Eigen::Index>(j - 2)))
                         .cwiseAbs()
                         .sum();
        }
        const double cost = config.cost_rate * traded;
        const double net = gross - cost;
        if (net <= -1.0)
            throw_error(ErrorKind::Numeric, "portfolio wiped out on " +
                                                weights.dates[j].to_string() +
                                                " (net return <= -100%)");
        const Eigen::Index d = static_cast<Eigen::Index>(j - 1);
        curve.gross(d) = gross;
        curve.cost(d) = cost;
        curve.net(d) = net;
        cum_log += std::log1p(net);
        curve.cum_log_equity(d) = cum_log;
    }
    return curve;
}

MarketDataset MarketDataset::build(PriceTable prices, int vol_span_days,
                                   int annualization_factor) {
    MarketDataset d;
    d.prices = std::move(prices);
    d.returns = compute_returns(d.prices);
    d.vols = ewm_volatility(d.returns, vol_span_days, annualization_factor);
    return d;
}

const std::vector<std::string>& standard_strategies() {
    static const std::vector<std::string> names = {"alloc1", "alloc2", "alloc3", "alloc4",
                                                   "mv",     "md",     "dwp",    "dls"};
    return names;
}

bool is_known_strategy(const std::string& name) {
    const auto& all = standard_strategies();
    return std::find(all.begin(), all.end(), name) != all.end();
}

namespace {

WeightPath slice_path(const WeightPath& full, const std::vector<Date>& dates, std::size_t from,
                      std::size_t to) {
    const std::size_t start = index_of(full.dates, dates[from]);
    const std::size_t count = to - from + 1;
    WeightPath out;
    out.dates.assign(full.dates.begin() + static_cast<std::ptrdiff_t>(start),
                     full.dates.begin() + static_cast<std::ptrdiff_t>(start + count));
    out.weights = full.weights.middleRows(static_cast<Eigen::Index>(start),
                                          static_cast<Eigen::Index>(count));
    return out;
}

} // namespace

WeightPath baseline_weights(const std::string& name, const MarketDataset& data, std::size_t from,
                            std::size_t to, const StrategyConfig& config,
                            std::size_t* minvar_fallback_days) {
    if (from < 1 || to >= data.prices.rows() || from > to)
        throw_error(ErrorKind::Contract, "invalid decision range");
    const std::size_t n = data.prices.assets();

    if (name.rfind("alloc", 0) == 0 && name.size() == 6) {
        if (n != 4)
            throw_error(ErrorKind::Config,
                        "allocation strategies require exactly 4 assets, got " +
                            std::to_string(n));
        const int which = name[5] - '0';
        const WeightPath full = fixed_allocation_path(data.returns, allocation_targets(which));
        return slice_path(full, data.prices.dates, from, to);
    }
    if (name == "dwp") {
        const WeightPath full = diversity_weighted_path(data.prices, config.dwp_exponent);
        return slice_path(full, data.prices.dates, from, to);
    }
    if (name == "mv" || name == "md") {
        const int window = config.estimate_window;
        if (from < static_cast<std::size_t>(window))
            throw_error(ErrorKind::InsufficientData,
                        name + " needs " + std::to_string(window) + " returns of history");
        WeightPath path;
        path.dates.assign(data.prices.dates.begin() + static_cast<std::ptrdiff_t>(from),
                          data.prices.dates.begin() + static_cast<std::ptrdiff_t>(to + 1));
        path.weights.resize(static_cast<Eigen::Index>(to - from + 1),
                            static_cast<Eigen::Index>(n));
        for (std::size_t t = from; t <= to; ++t) {
            // Estimates from the `window` most recent returns up to day t
            // (return rows t-window .. t-1).
            const auto block = data.returns.returns.middleRows(
                static_cast<Eigen::Index>(t - static_cast<std::size_t>(window)), window);
            const Eigen::RowVectorXd mean = block.colwise().mean();
            const Eigen::MatrixXd centered = block.rowwise() - mean;
            const Eigen::MatrixXd cov =
                (centered.transpose() * centered) / static_cast<double>(window - 1);
            SimplexSolverConfig solver = config.solver;
            solver.seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));
            const SolverResult res = name == "mv"
                                         ? max_sharpe_weights(mean.transpose(), cov, solver)
                                         : max_diversification_weights(cov, solver);
            if (res.minvar_fallback && minvar_fallback_days) ++*minvar_fallback_days;
            path.weights.row(static_cast<Eigen::Index>(t - from)) = res.weights.transpose();
        }
        return path;
    }
    throw_error(ErrorKind::Config, "unknown baseline strategy: " + name);
}

std::vector<TrainedSplitModel> train_walk_forward(const MarketDataset& data,
                                                  const std::vector<WalkForwardSplit>& splits,
                                                  const TrainConfig& config) {
    std::vector<TrainedSplitModel> out;
    out.reserve(splits.size());
    for (const auto& split : splits) {
        TrainOutcome res = train_on_split(data.prices, data.returns, split, config);
        TrainedSplitModel m;
        m.split = split;
        m.params = std::move(res.best_params);
        m.adam = std::move(res.best_adam);
        m.log = std::move(res.log);
        m.best_epoch = res.best_epoch;
        out.push_back(std::move(m));
    }
    return out;
}

RunResult run_walk_forward(const std::string& strategy, const MarketDataset& data,
                           const std::vector<WalkForwardSplit>& splits,
                           const BacktestConfig& bt_config, const StrategyConfig& strat_config,
                           const TrainConfig& train_config,
                           const std::vector<TrainedSplitModel>* dls_models) {
    if (!is_known_strategy(strategy))
        throw_error(ErrorKind::Config, "unknown strategy: " + strategy);
    if (splits.empty()) throw_error(ErrorKind::Contract, "no walk-forward splits");

    std::vector<TrainedSplitModel> trained;
    if (strategy == "dls" && dls_models == nullptr) {
        trained = train_walk_forward(data, splits, train_config);
        dls_models = &trained;
    }
    if (strategy == "dls" && dls_models->size() != splits.size())
        throw_error(ErrorKind::Contract, "need one trained model per walk-forward split");

    const std::size_t last_decision = data.prices.rows() - 1;
    WeightPath full;
    std::size_t minvar_days = 0;
    for (std::size_t s = 0; s < splits.size(); ++s) {
        const auto& split = splits[s];
        const std::size_t from = split.test_begin;
        const std::size_t to = std::min(split.test_end - 1, last_decision);
        WeightPath part;
        if (strategy == "dls") {
            const ModelParams& params = (*dls_models)[s].params;
            part.dates.assign(data.prices.dates.begin() + static_cast<std::ptrdiff_t>(from),
                              data.prices.dates.begin() + static_cast<std::ptrdiff_t>(to + 1));
            part.weights.resize(static_cast<Eigen::Index>(to - from + 1),
                                static_cast<Eigen::Index>(data.prices.assets()));
            std::vector<FeatureWindow> windows;
            windows.reserve(to - from + 1);
            for (std::size_t t = from; t <= to; ++t)
                windows.push_back(
                    build_window_at(data.prices, data.returns, t, train_config.features));
            std::vector<const FeatureWindow*> ptrs(windows.size());
            for (std::size_t j = 0; j < windows.size(); ++j) ptrs[j] = &windows[j];
            part.weights = forward_windows(params, ptrs);
        } else {
            part = baseline_weights(strategy, data, from, to, strat_config, &minvar_days);
        }
        if (full.rows() == 0) {
            full = std::move(part);
        } else {
            const Eigen::Index old_rows = full.weights.rows();
            full.dates.insert(full.dates.end(), part.dates.begin(), part.dates.end());
            full.weights.conservativeResize(old_rows + part.weights.rows(), Eigen::NoChange);
            full.weights.bottomRows(part.weights.rows()) = part.weights;
        }
    }

    align_path(full, data.prices.dates);

    RunResult result;
    result.strategy = strategy;
    result.minvar_fallback_days = minvar_days;
    result.positions = scale_positions(full, data.vols, bt_config);
    result.equity = simulate_equity(full, data.returns, data.vols, bt_config);
    result.metrics = compute_metrics(result.equity.net, bt_config.annualization_factor);
    result.weights = std::move(full);
    return result;
}

WeightShiftTable weight_shift_series(const WeightPath& weights, const ScaledPositionPath& scaled,
                                     Date from, Date to) {
    if (weights.rows() != scaled.dates.size())
        throw_error(ErrorKind::Contract, "weights and scaled positions are misaligned");
    const std::size_t begin = lower_bound_index(weights.dates, from);
    std::size_t end = begin;
    while (end < weights.dates.size() && weights.dates[end] <= to) ++end;
    if (begin >= end)
        throw_error(ErrorKind::InsufficientData, "empty weight-shift range " + from.to_string() +
                                                     " .. " + to.to_string());
    WeightShiftTable out;
    out.dates.assign(weights.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     weights.dates.begin() + static_cast<std::ptrdiff_t>(end));
    out.weights = weights.weights.middleRows(static_cast<Eigen::Index>(begin),
                                             static_cast<Eigen::Index>(end - begin));
    out.positions = scaled.positions.middleRows(static_cast<Eigen::Index>(begin),
                                                static_cast<Eigen::Index>(end - begin));
    return out;
}

} // namespace folio
