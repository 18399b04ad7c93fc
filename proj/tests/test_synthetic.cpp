#include <doctest.h>

#include <cmath>

#include "folio/errors.hpp"
#include "folio/market_data.hpp"
#include "folio/metrics.hpp"
#include "folio/synthetic.hpp"
#include "oracles.hpp"

using namespace folio;

TEST_SUITE_BEGIN("synthetic-data");

TEST_CASE("zero drift and volatility freeze prices at 100") {
    SyntheticSpec spec = SyntheticSpec::uncorrelated(3, 50, 0.0, 0.0, 1);
    PriceTable p = generate(spec);
    CHECK(p.rows() == 50);
    CHECK((p.closes.array() == 100.0).all());
}

TEST_CASE("generation is deterministic and strictly positive") {
    SyntheticSpec spec = SyntheticSpec::uncorrelated(4, 500, 0.05, 0.3, 42);
    PriceTable a = generate(spec);
    PriceTable b = generate(spec);
    CHECK(oracles::bit_equal(a.closes, b.closes));
    CHECK((a.closes.array() > 0.0).all());

    spec.seed = 43;
    PriceTable c = generate(spec);
    CHECK(!oracles::bit_equal(a.closes, c.closes));
}

TEST_CASE("log-return moments match the diffusion parameters") {
    const double drift = 0.08, vol = 0.25;
    SyntheticSpec spec = SyntheticSpec::uncorrelated(1, 100000, drift, vol, 7);
    PriceTable p = generate(spec);

    const Eigen::ArrayXd log_rets =
        (p.closes.col(0).tail(p.closes.rows() - 1).array() /
         p.closes.col(0).head(p.closes.rows() - 1).array())
            .log();
    const double mean = log_rets.mean();
    const double expect = (drift - 0.5 * vol * vol) / 252.0;
    const double se = (vol / std::sqrt(252.0)) / std::sqrt(static_cast<double>(log_rets.size()));
    CHECK(std::abs(mean - expect) < 3.0 * se);
}

TEST_CASE("pairwise correlation is reproduced") {
    SyntheticSpec spec = SyntheticSpec::uncorrelated(2, 50000, 0.0, 0.2, 9);
    spec.correlation << 1.0, 0.9, //
        0.9, 1.0;
    PriceTable p = generate(spec);
    ReturnTable r = compute_returns(p);
    const Eigen::VectorXd a = r.returns.col(0);
    const Eigen::VectorXd b = r.returns.col(1);
    const double ma = a.mean(), mb = b.mean();
    const double cov = ((a.array() - ma) * (b.array() - mb)).mean();
    const double corr = cov / std::sqrt((a.array() - ma).square().mean() *
                                        (b.array() - mb).square().mean());
    CHECK(std::abs(corr - 0.9) < 0.02);
}

TEST_CASE("non-psd correlation matrices are rejected") {
    SyntheticSpec spec = SyntheticSpec::uncorrelated(2, 100, 0.0, 0.2, 1);
    spec.correlation << 1.0, 1.2, //
        1.2, 1.0;
    CHECK_THROWS_AS(generate(spec), Error);

    spec.correlation << 1.0, 0.5, //
        0.4, 1.0; // asymmetric
    CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("planted-signal spec arithmetic") {
    SyntheticSpec spec = planted_signal_spec(0, 2.0, 4, 4000, 0.1, 5);
    CHECK(spec.annual_drift(0) == doctest::Approx(0.2).epsilon(1e-15));
    for (int i = 1; i < 4; ++i) CHECK(spec.annual_drift(i) == 0.0);
    CHECK_THROWS_AS(planted_signal_spec(4, 2.0, 4), Error);
    CHECK_THROWS_AS(planted_signal_spec(-1, 2.0, 4), Error);
    CHECK_THROWS_AS(planted_signal_spec(0, 0.0, 4), Error);
    CHECK_THROWS_AS(planted_signal_spec(0, 5.0, 4), Error);
}

TEST_CASE("planted signal realizes the target sharpe within a half unit") {
    SyntheticSpec spec = planted_signal_spec(1, 2.0, 4, 4000, 0.1, 31);
    PriceTable p = generate(spec);
    ReturnTable r = compute_returns(p);
    MetricBundle strong = compute_metrics(r.returns.col(1));
    CHECK(std::abs(strong.sharpe - 2.0) < 0.5);
    MetricBundle weak = compute_metrics(r.returns.col(0));
    CHECK(std::abs(weak.sharpe) < 1.0);
}

TEST_SUITE_END();
