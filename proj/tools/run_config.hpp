#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folio/backtest.hpp"
#include "folio/synthetic.hpp"
#include "folio/training.hpp"

namespace folio::cli {

/// Walk-forward section of the run configuration.
struct WalkForwardConfig {
    std::optional<Date> first_test_start;
    int retrain_every_years = 2;
    double validation_fraction = 0.10;
};

struct PlantedConfig {
    bool enabled = false;
    int asset = 0;
    double sharpe = 2.0;
    double vol = 0.1;
};

struct SynthConfig {
    int n_assets = 4;
    int days = 4000;
    std::vector<double> drift;              // scalar broadcast or per asset
    std::vector<double> vol;
    double pairwise_correlation = 0.0;      // used unless a matrix is given
    std::optional<Eigen::MatrixXd> correlation;
    Date start_date{2000, 1, 3};
    PlantedConfig planted;
};

/// Fully resolved run configuration: file values, overridden by CLI flags,
/// overriding the built-in defaults. Unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 42;
    std::vector<std::string> assets; // empty: use every CSV column
    TrainConfig training;            // includes feature settings
    WalkForwardConfig walkforward;
    BacktestConfig backtest;
    std::vector<std::string> strategies = standard_strategies();
    StrategyConfig strategy_params;
    SynthConfig synth;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text, const std::string& source);

    /// JSON echo of every resolved value.
    std::string resolved_json() const;

    SyntheticSpec synth_spec() const;
};

/// Flag values that take precedence over the config file.
struct FlagOverrides {
    std::optional<std::uint64_t> seed;
    std::vector<std::string> strategies;
    std::optional<double> sigma_target;
    std::optional<double> cost_rate;
    bool no_scaling = false;
};

void apply_overrides(RunConfig& config, const FlagOverrides& flags);

} // namespace folio::cli
