#pragma once

#include <cstdint>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/network.hpp"
#include "folio/objective.hpp"
#include "folio/rng.hpp"

namespace folio {

struct TrainConfig {
    int hidden = 64;
    int epochs = 100;
    int batch_size = 64;
    AdamConfig adam{};        // adam.alpha is the learning rate
    double clip_norm = 5.0;   // global-norm gradient clip, <= 0 disables
    bool shuffle_blocks = true;
    std::uint64_t seed = 42;
    FeatureConfig features{};
};

struct EpochSummary {
    int epoch = 0;
    double train_l = 0.0;      // mean block objective during the pass
    double validation_l = 0.0; // Sharpe over the whole validation tail
    double grad_norm = 0.0;    // mean pre-clip global gradient norm
    double wall_time_s = 0.0;
    int skipped_blocks = 0;    // degenerate-variance blocks
};

/// Contiguous blocks of `batch_size` decision days. Decision day t (a price
/// row index) requires a full lookback window at t and a realized return at
/// t+1; blocks shorter than 2 at the tail are dropped.
std::vector<TrainingBatch> make_training_batches(const PriceTable& prices,
                                                 const ReturnTable& returns,
                                                 const FeatureConfig& features,
                                                 std::size_t first_decision,
                                                 std::size_t last_decision, int batch_size);

/// One pass over the training blocks (order shuffled per epoch via rng when
/// enabled): forward, batch Sharpe, gradient ascent with clipping + Adam.
EpochSummary train_epoch(ModelParams& params, const std::vector<TrainingBatch>& train,
                         const std::vector<TrainingBatch>& validation, AdamState& adam,
                         Rng& shuffle_rng, const TrainConfig& config);

/// Sharpe of the realized portfolio returns over all of `batches` under the
/// current parameters (no gradient).
ObjectiveValue evaluate_objective(const ModelParams& params,
                                  const std::vector<TrainingBatch>& batches);

struct TrainOutcome {
    ModelParams best_params; // checkpoint with the best validation objective
    AdamState best_adam;     // optimizer state at that epoch
    std::vector<EpochSummary> log;
    int best_epoch = -1;
};

/// Full training run for one walk-forward split: train on the training range
/// minus its validation tail, select the epoch with the best validation L.
TrainOutcome train_on_split(const PriceTable& prices, const ReturnTable& returns,
                            const WalkForwardSplit& split, const TrainConfig& config);

} // namespace folio
