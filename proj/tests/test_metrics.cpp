#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "folio/errors.hpp"
#include "folio/metrics.hpp"
#include "folio/rng.hpp"
#include "oracles.hpp"

using namespace folio;

TEST_SUITE_BEGIN("performance-metrics");

TEST_CASE("strictly positive returns") {
    Eigen::VectorXd r(4);
    r << 0.01, 0.02, 0.005, 0.015;
    MetricBundle m = compute_metrics(r);
    CHECK(m.mdd == 0.0);
    CHECK(m.pct_positive == 1.0);
    CHECK(!m.sortino_finite);
    CHECK(!m.avg_ratio_finite);
    CHECK(std::isinf(m.sortino));
}

TEST_CASE("two-point case pins avg ratio and drawdown") {
    Eigen::VectorXd r(2);
    r << 0.10, -0.10;
    MetricBundle m = compute_metrics(r);
    CHECK(m.avg_p_over_avg_l == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.mdd == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(m.pct_positive == 0.5);
}

TEST_CASE("zero variance flags sharpe as undefined") {
    Eigen::VectorXd r = Eigen::VectorXd::Constant(10, 0.01);
    MetricBundle m = compute_metrics(r);
    CHECK(!m.sharpe_defined);
    CHECK(m.e_r == doctest::Approx(2.52).epsilon(1e-12));
}

TEST_CASE("random series match the brute-force oracle to 1e-10") {
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd r(2000);
        for (int i = 0; i < 2000; ++i) r(i) = 0.0004 + 0.012 * rng.gaussian();
        MetricBundle m = compute_metrics(r);
        oracles::MetricOracle o = oracles::metrics_brute(r, 252);
        CHECK(std::abs(m.e_r - o.e_r) < 1e-10);
        CHECK(std::abs(m.std_r - o.std_r) < 1e-10);
        CHECK(std::abs(m.sharpe - o.sharpe) < 1e-10);
        CHECK(std::abs(m.dd_r - o.dd_r) < 1e-10);
        CHECK(std::abs(m.sortino - o.sortino) < 1e-10);
        CHECK(std::abs(m.mdd - o.mdd) < 1e-10);
        CHECK(std::abs(m.pct_positive - o.pct_positive) < 1e-10);
        CHECK(std::abs(m.avg_p_over_avg_l - o.avg_p_over_avg_l) < 1e-10);
    }
}

TEST_CASE("scaling returns scales the linear metrics and fixes the ratios") {
    Rng rng(31415);
    Eigen::VectorXd r(500);
    for (int i = 0; i < 500; ++i) r(i) = 0.0002 + 0.01 * rng.gaussian();
    MetricBundle base = compute_metrics(r);
    const double c = 2.0; // exact in floating point
    MetricBundle scaled = compute_metrics(c * r);
    CHECK(scaled.e_r == doctest::Approx(c * base.e_r).epsilon(1e-12));
    CHECK(scaled.std_r == doctest::Approx(c * base.std_r).epsilon(1e-12));
    CHECK(scaled.dd_r == doctest::Approx(c * base.dd_r).epsilon(1e-12));
    CHECK(scaled.sharpe == doctest::Approx(base.sharpe).epsilon(1e-12));
    CHECK(scaled.sortino == doctest::Approx(base.sortino).epsilon(1e-12));
}

TEST_CASE("moment metrics are shuffle invariant; drawdown is not") {
    Rng rng(99);
    Eigen::VectorXd r(300);
    for (int i = 0; i < 300; ++i) r(i) = 0.0005 + 0.02 * rng.gaussian();
    MetricBundle base = compute_metrics(r);

    bool mdd_changed = false;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd shuffled = r;
        for (Eigen::Index i = shuffled.size(); i > 1; --i)
            std::swap(shuffled(i - 1), shuffled(static_cast<Eigen::Index>(rng.below(
                                           static_cast<std::uint64_t>(i)))));
        MetricBundle s = compute_metrics(shuffled);
        CHECK(s.e_r == doctest::Approx(base.e_r).epsilon(1e-10));
        CHECK(s.std_r == doctest::Approx(base.std_r).epsilon(1e-10));
        CHECK(s.sharpe == doctest::Approx(base.sharpe).epsilon(1e-10));
        CHECK(s.dd_r == doctest::Approx(base.dd_r).epsilon(1e-10));
        CHECK(s.sortino == doctest::Approx(base.sortino).epsilon(1e-10));
        CHECK(s.pct_positive == doctest::Approx(base.pct_positive).epsilon(1e-12));
        CHECK(s.avg_p_over_avg_l == doctest::Approx(base.avg_p_over_avg_l).epsilon(1e-10));
        if (std::abs(s.mdd - base.mdd) > 1e-12) mdd_changed = true;
    }
    CHECK(mdd_changed);
}

TEST_CASE("series shorter than two returns are rejected") {
    Eigen::VectorXd r(1);
    r << 0.01;
    CHECK_THROWS_AS(compute_metrics(r), Error);
}

TEST_SUITE_END();
