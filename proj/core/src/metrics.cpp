#include "folio/metrics.hpp"

#include <cmath>
#include <limits>

#include "folio/errors.hpp"

namespace folio {

MetricBundle compute_metrics(const Eigen::VectorXd& r, int annualization_factor) {
    const Eigen::Index t = r.size();
    if (t < 2) throw_error(ErrorKind::Contract, "compute_metrics needs at least 2 returns");
    const double af = static_cast<double>(annualization_factor);
    const double n = static_cast<double>(t);

    MetricBundle m;
    const double mean = r.mean();
    const double var = (r.array() - mean).square().sum() / n;
    m.e_r = mean * af;
    m.std_r = std::sqrt(var) * std::sqrt(af);
    if (m.std_r > 0.0) {
        m.sharpe = m.e_r / m.std_r;
    } else {
        m.sharpe_defined = false;
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
    }

    const double downside_ms = r.array().min(0.0).square().sum() / n;
    m.dd_r = std::sqrt(af) * std::sqrt(downside_ms);
    if (m.dd_r > 0.0) {
        m.sortino = m.e_r / m.dd_r;
    } else {
        m.sortino_finite = false;
        m.sortino = std::numeric_limits<double>::infinity();
    }

    // Max drawdown on compounded equity, running peak includes the starting
    // equity of 1.
    double equity = 1.0, peak = 1.0, mdd = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
        equity *= 1.0 + r(i);
        peak = std::max(peak, equity);
        mdd = std::max(mdd, (peak - equity) / peak);
    }
    m.mdd = mdd;

    double pos_sum = 0.0, neg_sum = 0.0;
    Eigen::Index pos_n = 0, neg_n = 0;
    for (Eigen::Index i = 0; i < t; ++i) {
        if (r(i) > 0.0) {
            pos_sum += r(i);
            ++pos_n;
        } else if (r(i) < 0.0) {
            neg_sum += r(i);
            ++neg_n;
        }
    }
    m.pct_positive = static_cast<double>(pos_n) / n;
    const double avg_p = pos_n > 0 ? pos_sum / static_cast<double>(pos_n) : 0.0;
    if (neg_n > 0) {
        const double avg_l = std::abs(neg_sum / static_cast<double>(neg_n));
        m.avg_p_over_avg_l = avg_p / avg_l;
    } else {
        m.avg_ratio_finite = false;
        m.avg_p_over_avg_l = std::numeric_limits<double>::infinity();
    }
    return m;
}

} // namespace folio
