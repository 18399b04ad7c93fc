#include "folio/features.hpp"

#include "folio/errors.hpp"

namespace folio {

namespace {

void check_config(const FeatureConfig& config) {
    if (config.lookback < 2)
        throw_error(ErrorKind::Config, "feature lookback must be >= 2, got " +
                                           std::to_string(config.lookback));
}

} // namespace

FeatureWindow build_window_at(const PriceTable& prices, const ReturnTable& returns,
                              std::size_t t, const FeatureConfig& config) {
    check_config(config);
    const std::size_t k = static_cast<std::size_t>(config.lookback);
    if (t >= prices.rows())
        throw_error(ErrorKind::Contract, "window index out of range");
    if (t < k)
        throw_error(ErrorKind::InsufficientData,
                    "not enough history for a " + std::to_string(k) + "-day window at " +
                        prices.dates[t].to_string());

    const Eigen::Index n = prices.closes.cols();
    FeatureWindow w;
    w.timestamp = prices.dates[t];
    w.m.resize(static_cast<Eigen::Index>(k), 2 * n);
    for (std::size_t j = 0; j < k; ++j) {
        // Row j covers price index p; its return row is p-1 (the return
        // realized on that day).
        const std::size_t p = t - k + 1 + j;
        for (Eigen::Index i = 0; i < n; ++i) {
            double price = prices.closes(static_cast<Eigen::Index>(p), i);
            if (config.price_normalization == PriceNormalization::WindowRelative)
                price /= prices.closes(static_cast<Eigen::Index>(t), i);
            w.m(static_cast<Eigen::Index>(j), 2 * i) = price;
            w.m(static_cast<Eigen::Index>(j), 2 * i + 1) =
                returns.returns(static_cast<Eigen::Index>(p - 1), i);
        }
    }
    return w;
}

FeatureWindow build_window(const PriceTable& prices, const ReturnTable& returns, Date t,
                           const FeatureConfig& config) {
    return build_window_at(prices, returns, index_of(prices.dates, t), config);
}

std::vector<FeatureWindow> window_stream(const PriceTable& prices, const ReturnTable& returns,
                                         const FeatureConfig& config, Date from, Date to) {
    check_config(config);
    const std::size_t k = static_cast<std::size_t>(config.lookback);
    std::vector<FeatureWindow> out;
    std::size_t begin = lower_bound_index(prices.dates, from);
    for (std::size_t t = std::max(begin, k); t < prices.rows() && prices.dates[t] <= to; ++t)
        out.push_back(build_window_at(prices, returns, t, config));
    if (out.empty())
        throw_error(ErrorKind::InsufficientData,
                    "no feature windows in range " + from.to_string() + " .. " + to.to_string());
    return out;
}

} // namespace folio
