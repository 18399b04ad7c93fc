#include "folio/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "folio/errors.hpp"

namespace folio {

namespace {

std::vector<const FeatureWindow*> window_ptrs(const TrainingBatch& batch) {
    std::vector<const FeatureWindow*> ptrs;
    ptrs.reserve(batch.windows.size());
    for (const auto& w : batch.windows) ptrs.push_back(&w);
    return ptrs;
}

} // namespace

std::vector<TrainingBatch> make_training_batches(const PriceTable& prices,
                                                 const ReturnTable& returns,
                                                 const FeatureConfig& features,
                                                 std::size_t first_decision,
                                                 std::size_t last_decision, int batch_size) {
    if (batch_size < 2) throw_error(ErrorKind::Config, "batch_size must be >= 2");
    const std::size_t k = static_cast<std::size_t>(features.lookback);
    const std::size_t lo = std::max(first_decision, k);
    // Decision t pairs with return row t (realized at price row t+1).
    const std::size_t hi = std::min(last_decision, prices.rows() >= 2 ? prices.rows() - 2
                                                                      : std::size_t{0});
    std::vector<TrainingBatch> out;
    if (lo > hi) return out;

    const Eigen::Index n = returns.returns.cols();
    std::size_t t = lo;
    while (t <= hi) {
        const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                                        hi - t + 1);
        if (count < 2) break; // a tail of one day has no variance
        TrainingBatch batch;
        batch.windows.reserve(count);
        batch.next_returns.resize(static_cast<Eigen::Index>(count), n);
        batch.return_dates.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t day = t + j;
            batch.windows.push_back(build_window_at(prices, returns, day, features));
            batch.next_returns.row(static_cast<Eigen::Index>(j)) =
                returns.returns.row(static_cast<Eigen::Index>(day));
            batch.return_dates.push_back(returns.dates[day]);
        }
        out.push_back(std::move(batch));
        t += count;
    }
    return out;
}

ObjectiveValue evaluate_objective(const ModelParams& params,
                                  const std::vector<TrainingBatch>& batches) {
    std::size_t total = 0;
    for (const auto& b : batches) total += b.size();
    if (total < 2) throw_error(ErrorKind::Contract, "evaluate_objective needs >= 2 decision days");

    Eigen::VectorXd all(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    for (const auto& b : batches) {
        auto ptrs = window_ptrs(b);
        const Eigen::MatrixXd weights = forward_batch(params, ptrs, nullptr);
        all.segment(at, static_cast<Eigen::Index>(b.size())) = portfolio_returns(weights, b);
        at += static_cast<Eigen::Index>(b.size());
    }
    return sharpe_value(all);
}

EpochSummary train_epoch(ModelParams& params, const std::vector<TrainingBatch>& train,
                         const std::vector<TrainingBatch>& validation, AdamState& adam,
                         Rng& shuffle_rng, const TrainConfig& config) {
    if (train.empty()) throw_error(ErrorKind::Contract, "train_epoch: no training batches");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (config.shuffle_blocks) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }

    EpochSummary summary;
    double l_sum = 0.0, norm_sum = 0.0;
    int used = 0;
    for (std::size_t idx : order) {
        const TrainingBatch& batch = train[idx];
        auto ptrs = window_ptrs(batch);
        ForwardTrace trace;
        const Eigen::MatrixXd weights = forward_batch(params, ptrs, &trace);
        const ObjectiveValue obj = sharpe_value(portfolio_returns(weights, batch));
        if (!std::isfinite(obj.l))
            throw_error(ErrorKind::Training,
                        "objective diverged (non-finite L) at batch starting " +
                            batch.return_dates.front().to_string());
        if (obj.degenerate) {
            ++summary.skipped_blocks;
            continue;
        }
        const Eigen::MatrixXd upstream = sharpe_gradient_wrt_weights(batch, weights);
        BackwardResult bw = backward_batch(params, trace, upstream, false);
        norm_sum += clip_global_norm(bw.grad, config.clip_norm);
        adam_step(params, bw.grad, adam);
        l_sum += obj.l;
        ++used;
    }

    summary.train_l = used > 0 ? l_sum / used : std::numeric_limits<double>::quiet_NaN();
    summary.grad_norm = used > 0 ? norm_sum / used : 0.0;
    if (!validation.empty()) {
        const ObjectiveValue val = evaluate_objective(params, validation);
        summary.validation_l =
            val.degenerate ? std::numeric_limits<double>::quiet_NaN() : val.l;
    } else {
        summary.validation_l = std::numeric_limits<double>::quiet_NaN();
    }
    summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

TrainOutcome train_on_split(const PriceTable& prices, const ReturnTable& returns,
                            const WalkForwardSplit& split, const TrainConfig& config) {
    // Validation decisions stop at val_end - 2 so their realized returns stay
    // inside the training range.
    auto train_batches = make_training_batches(prices, returns, config.features,
                                               split.train_begin, split.val_begin - 1,
                                               config.batch_size);
    std::vector<TrainingBatch> val_batches;
    if (split.val_end >= split.val_begin + 2)
        val_batches = make_training_batches(prices, returns, config.features, split.val_begin,
                                            split.val_end - 2, config.batch_size);
    if (train_batches.empty())
        throw_error(ErrorKind::InsufficientData,
                    "no training batches for split " + std::to_string(split.index));

    TrainOutcome out;
    ModelParams params =
        init_params(static_cast<int>(prices.assets()), config.hidden,
                    mix_seed(config.seed, static_cast<std::uint64_t>(split.index)));
    AdamState adam = AdamState::init(params, config.adam);
    Rng shuffle_rng(mix_seed(mix_seed(config.seed, 0x5b0cULL),
                             static_cast<std::uint64_t>(split.index)));
    double best_val = -std::numeric_limits<double>::infinity();
    out.best_params = params;
    out.best_adam = adam;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochSummary s = train_epoch(params, train_batches, val_batches, adam, shuffle_rng, config);
        s.epoch = epoch;
        out.log.push_back(s);
        if (std::isfinite(s.validation_l) && s.validation_l > best_val) {
            best_val = s.validation_l;
            out.best_params = params;
            out.best_adam = adam;
            out.best_epoch = epoch;
        }
    }
    if (out.best_epoch < 0) {
        // No usable validation signal; fall back to the final parameters.
        out.best_params = params;
        out.best_adam = adam;
        out.best_epoch = config.epochs;
    }
    return out;
}

} // namespace folio
