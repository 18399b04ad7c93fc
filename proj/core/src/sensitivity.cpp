#include "folio/sensitivity.hpp"

#include <cmath>

#include "folio/errors.hpp"

namespace folio {

std::vector<std::string> feature_labels(const std::vector<std::string>& assets, int lookback) {
    std::vector<std::string> out;
    out.reserve(assets.size() * 2 * static_cast<std::size_t>(lookback));
    for (const auto& asset : assets)
        for (const char* kind : {"price", "return"})
            for (int lag = 0; lag < lookback; ++lag)
                out.push_back(asset + "_" + kind + "_lag" + std::to_string(lag));
    return out;
}

InputGradients input_gradients(const ModelParams& params, const TrainingBatch& batch) {
    InputGradients out;
    std::vector<const FeatureWindow*> ptrs;
    ptrs.reserve(batch.windows.size());
    for (const auto& w : batch.windows) ptrs.push_back(&w);

    ForwardTrace trace;
    const Eigen::MatrixXd weights = forward_batch(params, ptrs, &trace);
    const ObjectiveValue obj = sharpe_value(portfolio_returns(weights, batch));
    if (obj.degenerate) {
        out.degenerate = true;
        return out;
    }
    const Eigen::MatrixXd upstream = sharpe_gradient_wrt_weights(batch, weights);
    BackwardResult bw = backward_batch(params, trace, upstream, true);
    out.per_window = std::move(bw.input_grads);
    return out;
}

Eigen::VectorXd flatten_abs_gradient(const Eigen::MatrixXd& g) {
    const Eigen::Index k = g.rows();
    const Eigen::Index n = g.cols() / 2;
    Eigen::VectorXd out(2 * n * k);
    Eigen::Index at = 0;
    for (Eigen::Index asset = 0; asset < n; ++asset)
        for (Eigen::Index kind = 0; kind < 2; ++kind)
            for (Eigen::Index lag = 0; lag < k; ++lag)
                out(at++) = std::abs(g(k - 1 - lag, 2 * asset + kind));
    return out;
}

SensitivityMap normalized_sensitivity(const Eigen::MatrixXd& gradients, std::vector<Date> dates,
                                      std::vector<std::string> labels) {
    if (static_cast<std::size_t>(gradients.rows()) != dates.size())
        throw_error(ErrorKind::Contract, "gradient rows and dates are misaligned");
    if (!gradients.allFinite())
        throw_error(ErrorKind::Contract, "sensitivity gradients must be finite");

    SensitivityMap out;
    out.dates = std::move(dates);
    out.labels = std::move(labels);
    out.values.resize(gradients.rows(), gradients.cols());
    out.flagged.assign(static_cast<std::size_t>(gradients.rows()), 0);
    for (Eigen::Index r = 0; r < gradients.rows(); ++r) {
        const Eigen::ArrayXd row = gradients.row(r).array().abs();
        const double mx = row.maxCoeff();
        if (mx <= 0.0) {
            out.values.row(r).setZero();
            out.flagged[static_cast<std::size_t>(r)] = 1;
        } else {
            out.values.row(r) = (row / mx).transpose();
        }
    }
    return out;
}

SensitivityMap sensitivity_over_blocks(const ModelParams& params,
                                       const std::vector<TrainingBatch>& blocks,
                                       const std::vector<std::string>& asset_names) {
    if (blocks.empty()) throw_error(ErrorKind::Contract, "no blocks for sensitivity analysis");
    const int k = static_cast<int>(blocks.front().windows.front().m.rows());
    auto labels = feature_labels(asset_names, k);

    Eigen::MatrixXd rows(static_cast<Eigen::Index>(blocks.size()),
                         static_cast<Eigen::Index>(labels.size()));
    std::vector<Date> dates;
    dates.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const InputGradients g = input_gradients(params, blocks[b]);
        // Attributed to the block's last decision date.
        dates.push_back(blocks[b].windows.back().timestamp);
        if (g.degenerate) {
            rows.row(static_cast<Eigen::Index>(b)).setZero(); // flagged downstream
            continue;
        }
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.size()));
        for (const auto& win_grad : g.per_window) acc += flatten_abs_gradient(win_grad);
        rows.row(static_cast<Eigen::Index>(b)) = acc.transpose();
    }
    return normalized_sensitivity(rows, std::move(dates), std::move(labels));
}

} // namespace folio
