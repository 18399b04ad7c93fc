#include <benchmark/benchmark.h>

#include "folio/backtest.hpp"
#include "folio/metrics.hpp"
#include "folio/network.hpp"
#include "folio/rng.hpp"
#include "folio/strategies.hpp"
#include "folio/synthetic.hpp"

using namespace folio;

namespace {

FeatureWindow make_window(int k, int n, Rng& rng) {
    FeatureWindow w;
    w.timestamp = Date{2019, 1, 2};
    w.m.resize(k, 2 * n);
    for (Eigen::Index r = 0; r < w.m.rows(); ++r)
        for (Eigen::Index c = 0; c < w.m.cols(); ++c)
            w.m(r, c) = (c % 2 == 0) ? 1.0 + 0.05 * rng.gaussian() : 0.01 * rng.gaussian();
    return w;
}

void BM_ForwardBatch(benchmark::State& state) {
    const int b = static_cast<int>(state.range(0));
    Rng rng(1);
    ModelParams params = init_params(4, 64, 7);
    std::vector<FeatureWindow> windows;
    for (int i = 0; i < b; ++i) windows.push_back(make_window(50, 4, rng));
    std::vector<const FeatureWindow*> ptrs;
    for (const auto& w : windows) ptrs.push_back(&w);
    for (auto _ : state) {
        Eigen::MatrixXd weights = forward_batch(params, ptrs, nullptr);
        benchmark::DoNotOptimize(weights);
    }
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(64);

void BM_ForwardBackward(benchmark::State& state) {
    Rng rng(2);
    ModelParams params = init_params(4, 64, 7);
    std::vector<FeatureWindow> windows;
    for (int i = 0; i < 64; ++i) windows.push_back(make_window(50, 4, rng));
    std::vector<const FeatureWindow*> ptrs;
    for (const auto& w : windows) ptrs.push_back(&w);
    Eigen::MatrixXd upstream(64, 4);
    for (Eigen::Index i = 0; i < upstream.size(); ++i) upstream.data()[i] = rng.gaussian();
    for (auto _ : state) {
        ForwardTrace trace;
        forward_batch(params, ptrs, &trace);
        BackwardResult bw = backward_batch(params, trace, upstream, false);
        benchmark::DoNotOptimize(bw.grad.head_w);
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_EwmVolatility(benchmark::State& state) {
    PriceTable prices = generate(SyntheticSpec::uncorrelated(4, 4000, 0.04, 0.2, 3));
    ReturnTable returns = compute_returns(prices);
    for (auto _ : state) {
        VolEstimateTable v = ewm_volatility(returns);
        benchmark::DoNotOptimize(v.sigma);
    }
}
BENCHMARK(BM_EwmVolatility);

void BM_SimplexProjection(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(4);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-2.0, 2.0);
    for (auto _ : state) {
        Eigen::VectorXd w = project_to_simplex(v);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_SimplexProjection)->Arg(4)->Arg(100);

void BM_MaxSharpeSolve(benchmark::State& state) {
    Rng rng(5);
    Eigen::VectorXd mu(4);
    for (int i = 0; i < 4; ++i) mu(i) = rng.uniform(-0.01, 0.03);
    Eigen::MatrixXd a(4, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 0.1 * rng.gaussian();
    Eigen::MatrixXd sigma = a * a.transpose() + 1e-4 * Eigen::MatrixXd::Identity(4, 4);
    SimplexSolverConfig cfg;
    cfg.seed = 9;
    for (auto _ : state) {
        SolverResult res = max_sharpe_weights(mu, sigma, cfg);
        benchmark::DoNotOptimize(res.weights);
    }
}
BENCHMARK(BM_MaxSharpeSolve);

void BM_SimulateEquity(benchmark::State& state) {
    MarketDataset data =
        MarketDataset::build(generate(SyntheticSpec::uncorrelated(4, 2100, 0.04, 0.2, 6)));
    StrategyConfig scfg;
    WeightPath path = baseline_weights("dwp", data, 60, 2000, scfg);
    BacktestConfig cfg;
    for (auto _ : state) {
        EquityCurve curve = simulate_equity(path, data.returns, data.vols, cfg);
        benchmark::DoNotOptimize(curve.net);
    }
}
BENCHMARK(BM_SimulateEquity);

void BM_ComputeMetrics(benchmark::State& state) {
    Rng rng(8);
    Eigen::VectorXd r(2000);
    for (int i = 0; i < 2000; ++i) r(i) = 0.0004 + 0.012 * rng.gaussian();
    for (auto _ : state) {
        MetricBundle m = compute_metrics(r);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_ComputeMetrics);

} // namespace

BENCHMARK_MAIN();
