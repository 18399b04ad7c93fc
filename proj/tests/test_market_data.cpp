#include <doctest.h>

#include <cmath>
#include <sstream>

#include "folio/errors.hpp"
#include "folio/market_data.hpp"
#include "folio/rng.hpp"
#include "oracles.hpp"

using namespace folio;

TEST_SUITE_BEGIN("market-data");

TEST_CASE("load_prices ingests a simple csv") {
    std::istringstream in("date,SPX\n2020-01-02,100\n2020-01-03,101\n2020-01-06,99\n");
    PriceTable t = load_prices(in);
    REQUIRE(t.rows() == 3);
    CHECK(t.asset_names == std::vector<std::string>{"SPX"});
    CHECK(t.closes(0, 0) == 100.0);
    CHECK(t.closes(1, 0) == 101.0);
    CHECK(t.closes(2, 0) == 99.0);
    CHECK(t.dates[0] == Date::parse("2020-01-02"));
}

TEST_CASE("load_prices inner-joins incomplete rows") {
    std::istringstream in(
        "date,A,B\n2020-01-02,100,50\n2020-01-03,101,\n2020-01-06,99,51\n");
    PriceTable t = load_prices(in);
    REQUIRE(t.rows() == 2);
    CHECK(t.dates[0] == Date::parse("2020-01-02"));
    CHECK(t.dates[1] == Date::parse("2020-01-06"));
}

TEST_CASE("load_prices rejects non-positive prices naming date and column") {
    std::istringstream in("date,A,B\n2020-01-02,100,50\n2020-01-03,-5,51\n");
    try {
        load_prices(in);
        FAIL("expected data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find("2020-01-03") != std::string::npos);
        CHECK(std::string(e.what()).find("A") != std::string::npos);
    }
}

TEST_CASE("load_prices reports parse errors with line numbers") {
    std::istringstream in("date,A\n2020-01-02,100\n2020-01-03,abc\n");
    try {
        load_prices(in);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("load_prices needs two usable rows") {
    std::istringstream in("date,A\n2020-01-02,100\n");
    CHECK_THROWS_AS(load_prices(in), Error);
}

TEST_CASE("load_prices selects and orders expected assets") {
    std::istringstream in("date,B,A\n2020-01-02,1,2\n2020-01-03,3,4\n");
    PriceTable t = load_prices(in, {"A", "B"});
    CHECK(t.asset_names == std::vector<std::string>{"A", "B"});
    CHECK(t.closes(0, 0) == 2.0);
    CHECK(t.closes(0, 1) == 1.0);
}

TEST_CASE("load_prices sorts unsorted input and rejects duplicates") {
    std::istringstream in("date,A\n2020-01-06,99\n2020-01-02,100\n2020-01-03,101\n");
    PriceTable t = load_prices(in);
    CHECK(t.dates[0] < t.dates[1]);
    CHECK(t.dates[1] < t.dates[2]);

    std::istringstream dup("date,A\n2020-01-02,100\n2020-01-02,101\n");
    CHECK_THROWS_AS(load_prices(dup), Error);
}

TEST_CASE("compute_returns matches the ratio formula") {
    PriceTable p;
    p.dates = weekday_range(Date{2020, 1, 6}, 3);
    p.asset_names = {"A"};
    p.closes.resize(3, 1);
    p.closes << 100, 90, 99;
    ReturnTable r = compute_returns(p);
    REQUIRE(r.rows() == 2);
    CHECK(r.returns(0, 0) == doctest::Approx(-0.10).epsilon(1e-14));
    CHECK(r.returns(1, 0) == doctest::Approx(0.10).epsilon(1e-14));

    SUBCASE("constant closes give zero returns") {
        p.closes << 50, 50, 50;
        ReturnTable z = compute_returns(p);
        CHECK(z.returns.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("single gain") {
        p.closes.resize(2, 1);
        p.dates.resize(2);
        p.closes << 100, 110;
        CHECK(compute_returns(p).returns(0, 0) == doctest::Approx(0.10).epsilon(1e-14));
    }
}

TEST_CASE("returns reconstruct prices through cumulative products") {
    Rng rng(11);
    PriceTable p;
    p.dates = weekday_range(Date{2015, 3, 2}, 400);
    p.asset_names = {"A", "B"};
    p.closes.resize(400, 2);
    p.closes.row(0) << 120.0, 80.0;
    for (int t = 1; t < 400; ++t)
        for (int i = 0; i < 2; ++i)
            p.closes(t, i) = p.closes(t - 1, i) * std::exp(0.01 * rng.gaussian());

    ReturnTable r = compute_returns(p);
    for (int i = 0; i < 2; ++i) {
        double price = p.closes(0, i);
        for (Eigen::Index t = 0; t < r.returns.rows(); ++t) {
            price *= 1.0 + r.returns(t, i);
            CHECK(std::abs(price - p.closes(t + 1, i)) / p.closes(t + 1, i) < 1e-10);
        }
    }
}

TEST_CASE("ewm volatility matches the quadratic brute-force recomputation") {
    Rng rng(7);
    ReturnTable r;
    r.dates = weekday_range(Date{2018, 1, 1}, 300);
    r.returns.resize(300, 1);
    for (int t = 0; t < 300; ++t) r.returns(t, 0) = 0.01 * rng.gaussian();

    VolEstimateTable v = ewm_volatility(r, 50, 252);
    Eigen::MatrixXd expected = oracles::ewm_vol_brute(r.returns, 50, 252);
    CHECK(oracles::max_rel_error(v.sigma, expected) < 1e-12);
    CHECK(v.warmup == 50);
}

TEST_CASE("ewm volatility of an alternating series converges to its population std") {
    const double x = 0.02;
    ReturnTable r;
    r.dates = weekday_range(Date{2010, 1, 4}, 500);
    r.returns.resize(500, 1);
    for (int t = 0; t < 500; ++t) r.returns(t, 0) = (t % 2 == 0) ? x : -x;

    VolEstimateTable v = ewm_volatility(r, 50, 252);
    const double target = x * std::sqrt(252.0);
    for (Eigen::Index t = static_cast<Eigen::Index>(v.warmup); t < 500; ++t)
        CHECK(std::abs(v.sigma(t, 0) - target) / target < 0.01);
}

TEST_CASE("ewm volatility flags zero-variance series as degenerate") {
    ReturnTable r;
    r.dates = weekday_range(Date{2010, 1, 4}, 120);
    r.returns = Eigen::MatrixXd::Constant(120, 1, 0.004);
    VolEstimateTable v = ewm_volatility(r, 50, 252);
    CHECK(v.degenerate);
    CHECK(v.sigma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ewm volatility rejects tiny spans") {
    ReturnTable r;
    r.dates = weekday_range(Date{2010, 1, 4}, 10);
    r.returns = Eigen::MatrixXd::Zero(10, 1);
    CHECK_THROWS_AS(ewm_volatility(r, 1), Error);
}

TEST_CASE("ewm volatility has no lookahead (bit-identical under truncation)") {
    Rng rng(13);
    ReturnTable r;
    r.dates = weekday_range(Date{2012, 1, 2}, 200);
    r.returns.resize(200, 2);
    for (int t = 0; t < 200; ++t)
        for (int i = 0; i < 2; ++i) r.returns(t, i) = 0.01 * rng.gaussian();

    VolEstimateTable full = ewm_volatility(r, 50, 252);
    for (int cut : {60, 125, 199}) {
        ReturnTable head;
        head.dates.assign(r.dates.begin(), r.dates.begin() + cut + 1);
        head.returns = r.returns.topRows(cut + 1);
        VolEstimateTable part = ewm_volatility(head, 50, 252);
        for (int t = 0; t <= cut; ++t)
            for (int i = 0; i < 2; ++i) CHECK(part.sigma(t, i) == full.sigma(t, i));
    }
}

TEST_CASE("walk-forward splits tile 2011..2020 into five windows") {
    // Weekday calendar from 2006 through the end of April 2020.
    std::vector<Date> dates;
    for (std::int64_t s = Date{2006, 1, 2}.serial(); s <= Date{2020, 4, 30}.serial(); ++s) {
        Date d = Date::from_serial(s);
        if (!d.is_weekend()) dates.push_back(d);
    }
    auto splits = walk_forward_splits(dates, Date{2011, 1, 1}, 2, 0.10);
    REQUIRE(splits.size() == 5);

    CHECK(dates[splits[0].test_begin] == Date{2011, 1, 3});
    CHECK(dates[splits[1].test_begin].year == 2013);
    CHECK(dates[splits[2].test_begin].year == 2015);
    CHECK(dates[splits[3].test_begin].year == 2017);
    CHECK(dates[splits[4].test_begin].year == 2019);
    CHECK(splits[4].test_end == dates.size());
    CHECK(dates[splits[4].test_end - 1] == Date{2020, 4, 30});

    SUBCASE("test ranges tile the full period without overlap") {
        for (std::size_t j = 1; j < splits.size(); ++j)
            CHECK(splits[j].test_begin == splits[j - 1].test_end);
    }
    SUBCASE("validation is the chronological tail of training") {
        for (const auto& s : splits) {
            CHECK(s.val_end == s.test_begin);
            CHECK(s.val_begin < s.val_end);
            CHECK(s.train_end == s.test_begin);
        }
    }
}

TEST_CASE("validation fraction carves the stated tail") {
    std::vector<Date> dates = weekday_range(Date{2016, 1, 4}, 1250);
    // Pick a test start that leaves exactly 1000 training days.
    Date first_test = dates[1000];
    auto splits = walk_forward_splits(dates, first_test, 2, 0.10);
    REQUIRE(!splits.empty());
    CHECK(splits[0].test_begin == 1000);
    CHECK(splits[0].val_end - splits[0].val_begin == 100);
}

TEST_CASE("walk-forward rejects out-of-range test starts") {
    std::vector<Date> dates = weekday_range(Date{2016, 1, 4}, 300);
    CHECK_THROWS_AS(walk_forward_splits(dates, Date{2015, 1, 1}, 2, 0.1), Error);
    CHECK_THROWS_AS(walk_forward_splits(dates, dates.front(), 2, 0.1), Error);
    CHECK_THROWS_AS(walk_forward_splits(dates, Date{2030, 1, 1}, 2, 0.1), Error);
    CHECK_THROWS_AS(walk_forward_splits(dates, dates[100], 2, 0.6), Error);
}

TEST_SUITE_END();
