#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "folio/network.hpp"
#include "folio/objective.hpp"

namespace folio {

/// Per-date normalized feature sensitivities in [0, 1]; each unflagged row's
/// maximum is exactly 1. Column order is (asset, feature-kind, lag) with
/// lag 0 the most recent observation.
struct SensitivityMap {
    std::vector<Date> dates;
    Eigen::MatrixXd values; // rows x (2 * n * k)
    std::vector<std::uint8_t> flagged; // all-zero gradient rows
    std::vector<std::string> labels;
};

/// Column labels `<asset>_<price|return>_lag<j>`.
std::vector<std::string> feature_labels(const std::vector<std::string>& assets, int lookback);

struct InputGradients {
    std::vector<Eigen::MatrixXd> per_window; // dL/dx, k x 2n each
    bool degenerate = false;                 // batch variance too small
};

/// Exact gradients of the batch Sharpe objective with respect to every entry
/// of every feature window in the batch.
InputGradients input_gradients(const ModelParams& params, const TrainingBatch& batch);

/// Flattens a window gradient into (asset, kind, lag) order, absolute values.
Eigen::VectorXd flatten_abs_gradient(const Eigen::MatrixXd& window_grad);

/// Normalizes each row by its maximum absolute entry; all-zero rows are
/// flagged and left at zero rather than divided.
SensitivityMap normalized_sensitivity(const Eigen::MatrixXd& gradients,
                                      std::vector<Date> dates,
                                      std::vector<std::string> labels);

/// One sensitivity row per batch (summed |dL/dx| across the block's windows,
/// then normalized), attributed to the block's last decision date.
SensitivityMap sensitivity_over_blocks(const ModelParams& params,
                                       const std::vector<TrainingBatch>& blocks,
                                       const std::vector<std::string>& asset_names);

} // namespace folio
