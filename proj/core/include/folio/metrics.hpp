#pragma once

#include <Eigen/Dense>

namespace folio {

/// Annualized performance summary of a daily net-return series. Moments use
/// population normalization (divide by T); drawdown is measured on
/// compounded equity.
struct MetricBundle {
    double e_r = 0.0;   // mean return * annualization_factor
    double std_r = 0.0; // population std * sqrt(annualization_factor)
    double sharpe = 0.0;
    double dd_r = 0.0; // sqrt(af) * sqrt(mean of min(r,0)^2), target 0
    double sortino = 0.0;
    double mdd = 0.0;          // max peak-to-trough fraction, in [0,1]
    double pct_positive = 0.0; // fraction of days with r > 0
    double avg_p_over_avg_l = 0.0;

    bool sharpe_defined = true;   // false when std_r == 0
    bool sortino_finite = true;   // false when there are no negative days
    bool avg_ratio_finite = true; // ditto
};

MetricBundle compute_metrics(const Eigen::VectorXd& net_returns, int annualization_factor = 252);

} // namespace folio
